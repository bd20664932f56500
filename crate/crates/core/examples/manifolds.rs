//! Graphed generic manifolds y = h(w, x) and submanifolds given by equations.

use crdisc::manifold::tangency_check;
use crdisc::poly::RealPoly;
use crdisc::{Complex64, GenericManifold, Submanifold};

fn main() -> crdisc::Result<()> {
    // y = |w|² + x·u in C², parameters (u, v, x)
    let h = RealPoly::monomial(3, 1.0, &[(0, 2)])
        .add(&RealPoly::monomial(3, 1.0, &[(1, 2)]))
        .add(&RealPoly::monomial(3, 1.0, &[(0, 1), (2, 1)]));
    let m = GenericManifold::new(1, 1, vec![h])?;
    println!("p = {}, q = {}, real dimension {}", m.p(), m.q(), m.dim());

    let params = [0.1, -0.2, 0.3];
    let z = m.point_of(&params);
    println!("point {z:?}");
    println!("defining function r(z) = {:?}", m.eval_r(&z));
    println!("back to parameters {:?}", m.params_of(&z));

    let n = Submanifold::coordinate(&m, &[0, 1])?;
    let origin = vec![Complex64::new(0.0, 0.0); 2];
    let t = tangency_check(&n, &m, &origin)?;
    println!("N = {{w = 0}}: T N contains T^c M: {}, gap {:.3}", t.contains_tc, t.gap);
    let n = Submanifold::coordinate(&m, &[1, 2])?;
    let t = tangency_check(&n, &m, &origin)?;
    println!("N = {{v = x = 0}}: T N contains T^c M: {}, gap {:.3}", t.contains_tc, t.gap);
    Ok(())
}
