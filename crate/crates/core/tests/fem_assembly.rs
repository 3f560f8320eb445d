use num_complex::Complex64 as C;
use proptest::prelude::*;
use spectral_stokes::fem::{
    boundary_traction_load, neumann_load, BoundaryData, FluidProps, Operators, PatchValue,
    ViscousForm,
};
use spectral_stokes::krylov::{gmres_solve, SolverSettings};
use spectral_stokes::mesh::{
    channel, pipe, promote_to_quadratic, unit_square, BoundaryGeometry, BoundaryPatch, ChannelSpec,
    Mesh, PatchKind, PipeSpec, QuadraticMesh,
};
use spectral_stokes::oracles::field_error;
use std::collections::{BTreeMap, HashMap};

const Z: C = C::new(0.0, 0.0);

fn quad(mesh: &Mesh) -> QuadraticMesh {
    promote_to_quadratic(mesh, &BoundaryGeometry::new()).unwrap()
}

fn small_channel(nx: usize, ny: usize) -> QuadraticMesh {
    quad(&channel(&ChannelSpec {
        length: 2.0,
        half_height: 1.0,
        nx,
        ny,
    }))
}

fn inlet_traction(p: f64) -> BoundaryData<C> {
    BoundaryData::new().with_neumann("inlet", PatchValue::Uniform([C::new(p, 0.0), Z, Z]))
}

fn props() -> FluidProps {
    FluidProps::new(1.3, 0.7).unwrap()
}

// Polynomials in barycentric coordinates, integrated exactly with
// ∫ l1^a l2^b l3^c = 2 A a! b! c! / (a + b + c + 2)!.
type Poly = HashMap<[u32; 3], f64>;

fn mono(e: [u32; 3], c: f64) -> Poly {
    HashMap::from([(e, c)])
}

fn add(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(*k).or_insert(0.0) += v;
    }
    out
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
            *out.entry(k).or_insert(0.0) += va * vb;
        }
    }
    out
}

fn fact(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn integrate(p: &Poly, area: f64) -> f64 {
    p.iter()
        .map(|(k, v)| {
            v * 2.0 * area * fact(k[0]) * fact(k[1]) * fact(k[2]) / fact(k[0] + k[1] + k[2] + 2)
        })
        .sum()
}

fn unit(i: usize) -> [u32; 3] {
    let mut e = [0; 3];
    e[i] = 1;
    e
}

/// Quadratic shape function of a vertex `i` or of the edge `(i, j)`.
fn shape(i: usize, j: Option<usize>) -> Poly {
    match j {
        None => add(
            &mono(
                [
                    2 * (i == 0) as u32,
                    2 * (i == 1) as u32,
                    2 * (i == 2) as u32,
                ],
                2.0,
            ),
            &mono(unit(i), -1.0),
        ),
        Some(j) => mul(&mono(unit(i), 4.0), &mono(unit(j), 1.0)),
    }
}

#[test]
fn single_triangle_mass_matches_exact_integrals() {
    let nodes = vec![[0.3, 0.1, 0.0], [2.1, 0.4, 0.0], [0.7, 1.9, 0.0]];
    let area = 0.5 * ((2.1f64 - 0.3) * (1.9 - 0.1) - (0.7 - 0.3) * (0.4 - 0.1));
    let patches = vec![BoundaryPatch::new(
        "side",
        PatchKind::Neumann,
        vec![vec![0, 1]],
    )];
    let q = quad(&Mesh::new(2, nodes, vec![0, 1, 2], patches).unwrap());
    let ops = Operators::assemble(&q, ViscousForm::Full).unwrap();
    assert_eq!(ops.dofs.n_constrained(), 0);
    let mass = ops.uu.combine([0.0, 1.0, 0.0]);
    let mut local: Vec<(usize, Option<usize>)> = (0..3).map(|i| (i, None)).collect();
    local.extend([(0, Some(1)), (1, Some(2)), (0, Some(2))]);
    let node_of = |(i, j): (usize, Option<usize>)| match j {
        None => i,
        Some(j) => q.edge_node(i, j).unwrap(),
    };
    for &a in &local {
        for &b in &local {
            let exact = integrate(&mul(&shape(a.0, a.1), &shape(b.0, b.1)), area);
            let (na, nb) = (node_of(a), node_of(b));
            for c in 0..2 {
                let i = ops.dofs.unknown(ops.dofs.velocity_dof(na, c)).unwrap();
                let j = ops.dofs.unknown(ops.dofs.velocity_dof(nb, c)).unwrap();
                assert!((mass.get(i, j) - exact).abs() < 1e-13, "{a:?} {b:?}");
                let k = ops.dofs.unknown(ops.dofs.velocity_dof(nb, 1 - c)).unwrap();
                assert_eq!(mass.get(i, k), 0.0);
            }
        }
    }
    // the familiar closed forms
    let m = |a, b| {
        let i = ops.dofs.unknown(ops.dofs.velocity_dof(a, 0)).unwrap();
        let j = ops.dofs.unknown(ops.dofs.velocity_dof(b, 0)).unwrap();
        mass.get(i, j)
    };
    let (e01, e12) = (q.edge_node(0, 1).unwrap(), q.edge_node(1, 2).unwrap());
    assert!((m(0, 0) - area / 30.0).abs() < 1e-13);
    assert!((m(0, 1) + area / 180.0).abs() < 1e-13);
    assert!((m(e01, e01) - 8.0 * area / 45.0).abs() < 1e-13);
    assert!((m(e01, e12) - 4.0 * area / 45.0).abs() < 1e-13);
    assert!(m(0, e01).abs() < 1e-13);
    assert!((m(0, e12) + area / 45.0).abs() < 1e-13);
}

#[test]
fn mode_operator_is_complex_symmetric() {
    let meshes = [
        small_channel(6, 3),
        quad(&pipe(&PipeSpec {
            radius: 1.0,
            length: 2.0,
            rings: 3,
            layers: 2,
        })),
    ];
    for q in &meshes {
        for form in [ViscousForm::Full, ViscousForm::Symmetric] {
            let ops = Operators::assemble(q, form).unwrap();
            for omega in [0.0, 0.5, 40.0] {
                let a = ops.uu.combine(Operators::mode_weights(&props(), omega));
                assert!(a.symmetry_defect() <= 1e-13, "{form} {omega}");
            }
        }
    }
}

#[test]
fn zero_frequency_operator_is_real() {
    let q = small_channel(5, 3);
    let ops = Operators::assemble(&q, ViscousForm::Full).unwrap();
    let sys = ops
        .mode_system(&q, &props(), 0.0, &inlet_traction(2.0))
        .unwrap();
    for i in 0..sys.matrix.nrows() {
        assert!(sys.matrix.row(i).all(|(_, v)| v.im == 0.0));
    }
    assert!(sys.rhs.iter().all(|v| v.im == 0.0));
}

#[test]
fn pressure_block_is_empty() {
    let q = small_channel(5, 3);
    let ops = Operators::assemble(&q, ViscousForm::Full).unwrap();
    let a = ops.uu.combine(Operators::mode_weights(&props(), 3.0));
    let nv = ops.dofs.n_velocity_dofs();
    let full = ops.dofs.unknown_to_full();
    for i in 0..a.nrows() {
        if full[i] >= nv {
            assert!(a.row(i).all(|(j, _)| full[j] < nv));
        }
    }
}

#[test]
fn zero_data_gives_zero_rhs_and_solution() {
    let q = small_channel(5, 3);
    let ops = Operators::assemble(&q, ViscousForm::Full).unwrap();
    let data = BoundaryData::new()
        .with_neumann("inlet", PatchValue::zero())
        .with_neumann("outlet", PatchValue::zero());
    let sys = ops.mode_system(&q, &props(), 2.0, &data).unwrap();
    assert!(sys.rhs.iter().all(|v| *v == Z));
    let (x, report) = gmres_solve(&sys, &SolverSettings::default(), None).unwrap();
    assert!(report.converged);
    assert!(x.iter().all(|v| *v == Z));
}

#[test]
fn uniform_traction_load_sums_to_patch_measure() {
    let q = quad(&channel(&ChannelSpec {
        length: 3.0,
        half_height: 1.5,
        nx: 4,
        ny: 5,
    }));
    let load = boundary_traction_load(&q, "inlet", &PatchValue::Uniform([1.0, 0.0, 0.0])).unwrap();
    let sx: f64 = load.iter().step_by(2).sum();
    let sy: f64 = load.iter().skip(1).step_by(2).sum();
    assert!((sx - 3.0).abs() < 1e-13);
    assert_eq!(sy, 0.0);
    let zero = boundary_traction_load(&q, "inlet", &PatchValue::<f64>::zero()).unwrap();
    assert!(zero.iter().all(|v| *v == 0.0));
    assert!(boundary_traction_load(&q, "walls", &PatchValue::Uniform([1.0, 0.0, 0.0])).is_err());
}

#[test]
fn linear_traction_gives_exact_nodal_loads() {
    let q = quad(&unit_square());
    let mid = q.edge_node(0, 3).unwrap();
    let nodal = BTreeMap::from([
        (0, [0.0, 0.0, 0.0]),
        (3, [1.0, 0.0, 0.0]),
        (mid, [0.5, 0.0, 0.0]),
    ]);
    let load = boundary_traction_load(&q, "left", &PatchValue::Nodal(nodal)).unwrap();
    assert!(load[0].abs() < 1e-15);
    assert!((load[3 * 2] - 1.0 / 6.0).abs() < 1e-15);
    assert!((load[mid * 2] - 1.0 / 3.0).abs() < 1e-15);
    let rest: f64 = load
        .iter()
        .enumerate()
        .filter(|(i, _)| ![0, 6, mid * 2].contains(i))
        .map(|(_, v)| v.abs())
        .sum();
    assert_eq!(rest, 0.0);
}

#[test]
fn steady_channel_reproduces_parabola() {
    let q = small_channel(6, 4);
    let ops = Operators::assemble(&q, ViscousForm::Full).unwrap();
    let p = props();
    let sys = ops.mode_system(&q, &p, 0.0, &inlet_traction(1.0)).unwrap();
    let (x, report) = gmres_solve(&sys, &SolverSettings::default().with_tol(1e-12), None).unwrap();
    assert!(report.converged);
    let full = sys.expand(&x);
    for (n, node) in q.nodes().iter().enumerate() {
        let exact = (1.0 - node[1] * node[1]) / (2.0 * p.mu * 2.0);
        assert!((full[2 * n] - exact).norm() < 1e-8, "node {n}");
        assert!(full[2 * n + 1].norm() < 1e-8);
    }
    let err = field_error(&q, &full, &|x| {
        Ok([C::new((1.0 - x[1] * x[1]) / (4.0 * p.mu), 0.0), Z, Z])
    })
    .unwrap();
    assert!(err < 1e-8);
}

#[test]
fn wall_reactions_balance_boundary_traction() {
    let q = small_channel(6, 3);
    for form in [ViscousForm::Full, ViscousForm::Symmetric] {
        let ops = Operators::assemble(&q, form).unwrap();
        let p = props();
        let data = inlet_traction(0.8);
        let w = Operators::mode_weights(&p, 0.0);
        let sys = ops.system(&q, w, &data).unwrap();
        let (x, _) = gmres_solve(&sys, &SolverSettings::default().with_tol(1e-12), None).unwrap();
        let full = sys.expand(&x);
        let load = neumann_load(&q, &data).unwrap();
        let rows = ops.constrained_rows(w, &full);
        let mut reaction_x = Z;
        for (k, &f) in ops.dofs.constrained_to_full().iter().enumerate() {
            if f < load.len() && f % 2 == 0 {
                reaction_x += rows[k] - load[f];
            }
        }
        // -∫ h_x over an inlet of height 2
        assert!(
            (reaction_x - C::new(-1.6, 0.0)).norm() < 1e-8,
            "{form}: {reaction_x}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rayleigh_quotient_is_dissipative(
        seed in prop::collection::vec(-1.0f64..1.0, 2..400),
        omega in 0.01f64..50.0,
    ) {
        let q = small_channel(4, 3);
        let ops = Operators::assemble(&q, ViscousForm::Full).unwrap();
        let a = ops.uu.combine(Operators::mode_weights(&props(), omega));
        let nv = ops.dofs.n_velocity_dofs();
        let full = ops.dofs.unknown_to_full();
        let x: Vec<C> = (0..a.nrows())
            .map(|i| if full[i] < nv {
                C::new(seed[i % seed.len()], seed[(i * 7 + 3) % seed.len()])
            } else {
                Z
            })
            .collect();
        prop_assume!(x.iter().any(|v| v.norm() > 1e-3));
        let ax = a.mul_vec(&x);
        let r: C = x.iter().zip(&ax).map(|(xi, yi)| xi.conj() * yi).sum();
        prop_assert!(r.re >= 0.0);
        prop_assert!(r.im > 0.0);
    }
}
