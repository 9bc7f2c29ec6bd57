use hexvof::clip;
use hexvof::geometry::{Geometry, Point3};
use hexvof::hexmesh::{build_box_mesh, jacobian_det, RefCoord};
use hexvof::insertion::amr_element_fraction;

fn trilinear_volume(corners: &[Point3; 8]) -> f64 {
    let g = 1.0 / 3.0f64.sqrt();
    let mut total = 0.0;
    for &xi in &[-g, g] {
        for &eta in &[-g, g] {
            for &zeta in &[-g, g] {
                total += jacobian_det(corners, RefCoord::new(xi, eta, zeta));
            }
        }
    }
    total
}

fn main() {
    // Chordal vs trilinear element volume gap on the real meshes.
    for (name, mesh) in [
        (
            "32^3 [-2,2]^3 + sinusoidal",
            build_box_mesh(Point3::new(-2.0, -2.0, -2.0), Point3::new(2.0, 2.0, 2.0), 32)
                .unwrap()
                .apply_sinusoidal_perturbation(),
        ),
        (
            "32^3 [-10,10]^3 + sinusoidal + shear",
            build_box_mesh(Point3::new(-10.0, -10.0, -10.0), Point3::new(10.0, 10.0, 10.0), 32)
                .unwrap()
                .apply_sinusoidal_perturbation()
                .apply_shear_scaling(),
        ),
        (
            "4^3 [-2,2]^3 + sinusoidal",
            build_box_mesh(Point3::new(-2.0, -2.0, -2.0), Point3::new(2.0, 2.0, 2.0), 4)
                .unwrap()
                .apply_sinusoidal_perturbation(),
        ),
    ] {
        let mut worst = 0.0f64;
        for e in 0..mesh.n_elements() {
            let corners = mesh.element_corners(e);
            let chordal = clip::hex_volume(&corners);
            let tri = trilinear_volume(&corners);
            worst = worst.max((chordal - tri).abs() / tri.abs());
        }
        println!("{name}: max |chordal-trilinear|/tri = {worst:.3e}");
    }

    // Single-element sphere fraction sweep.
    let mesh = build_box_mesh(Point3::new(-2.0, -2.0, -2.0), Point3::new(2.0, 2.0, 2.0), 1).unwrap();
    let geom = Geometry::sphere(Point3::ORIGIN, 1.0).unwrap();
    let exact = 4.0 * std::f64::consts::PI / 3.0 / 64.0;
    for n in 0..=7u32 {
        let (f, hits) = amr_element_fraction(&mesh, 0, &geom, n);
        println!(
            "single element n_sub={n}: fraction {f:.10} rel_err {:.3e} hits {hits}",
            (f - exact).abs() / exact
        );
    }

    // 16^3 insertion error at n_sub=4.
    let mesh = build_box_mesh(Point3::new(-2.0, -2.0, -2.0), Point3::new(2.0, 2.0, 2.0), 16).unwrap();
    let tree = hexvof::build_kdtree(&mesh).unwrap();
    let exact = geom.exact_volume().unwrap();
    for n in 0..=5u32 {
        let cfg = hexvof::InsertionConfig::new(n, hexvof::Method::AmrPlane).unwrap();
        let (field, _) = hexvof::insert_geometry(&mesh, &tree, &geom, &cfg).unwrap();
        let total = hexvof::insertion::total_volume(&field, &mesh);
        println!("16^3 n_sub={n}: rel_err {:.3e}", (total - exact).abs() / exact);
    }

    // Max pre-clamp AMR fraction excursion over boundary elements of the
    // perturbed 32^3 mesh.
    let mesh = build_box_mesh(Point3::new(-2.0, -2.0, -2.0), Point3::new(2.0, 2.0, 2.0), 32)
        .unwrap()
        .apply_sinusoidal_perturbation();
    for n in [2u32, 4] {
        let mut worst: f64 = 0.0;
        let mut boundary = 0;
        for e in 0..mesh.n_elements() {
            let s = hexvof::spatial::bounding_sphere_of_elements(&mesh, &[e]);
            if geom.classify_sphere(s.center, s.radius) == hexvof::SphereClass::Intersecting {
                boundary += 1;
                let (f, _) = amr_element_fraction(&mesh, e, &geom, n);
                worst = worst.max(f - 1.0).max(-f);
            }
        }
        println!("32^3 sinusoidal n_sub={n}: boundary {boundary}, max excursion {worst:.3e}");
    }
}
