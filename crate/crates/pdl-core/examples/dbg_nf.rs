use pdl_core::fibers::*;
use pdl_core::params::GroupParams;
use pdl_core::variety::{collect_points, PointSet, Shape};

fn main() {
    let p = GroupParams::new(2, 1, 2, 0, 2).unwrap();
    let t = p.tower_for(&[3 * p.n]).unwrap();
    let pb = GroupParams::new(2, 1, 2, 0, 1).unwrap();
    let sb = Shape::lattice_plus(pb);
    let bases = collect_points(&sb, &t, PointSet::Xh, 3, 1 << 24).unwrap();
    for b in bases {
        let fb = FiberBase::new(&p, &t, b).unwrap();
        if fb.label == 1 {
            let rep = verify_normal_form(&fb, &t, 3, 1 << 24).unwrap();
            println!("fiber {} hyper {} inj {} onto {} equi {}", rep.fiber_size, rep.hypersurface_size, rep.injective, rep.onto_hypersurface, rep.equivariant);
            break;
        }
    }
}
