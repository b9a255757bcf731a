use std::collections::HashMap;
use std::sync::OnceLock;

use proptest::prelude::*;

use pcf_besov::besov::{lambda_norm, region_classify, NormConfig, Region};
use pcf_besov::critical::edge_sum;
use pcf_besov::function::{
    conditional_expectation, harmonic_extend, project_piecewise_harmonic, tent_interpolation, PiecewiseHarmonic,
    VertexFunction,
};
use pcf_besov::laplacian::cell_energy;
use pcf_besov::pcf::{presets, FractalDescriptor};
use pcf_besov::resistance::ResistanceSolver;
use pcf_besov::spectral::{heat_apply, mass_matrix, neumann_eigs, SpectralData};
use pcf_besov::{Fractal, Method};

const LEVEL: usize = 4;

fn fractal(k: usize) -> &'static Fractal {
    static CELLS: [OnceLock<Fractal>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CELLS[k].get_or_init(|| {
        let d = match k {
            0 => presets::interval(),
            1 => presets::sierpinski_gasket(),
            _ => presets::vicsek(),
        };
        Fractal::new(&d, if k == 0 { 8 } else { LEVEL }).unwrap()
    })
}

fn gasket_spectrum() -> &'static SpectralData {
    static S: OnceLock<SpectralData> = OnceLock::new();
    S.get_or_init(|| neumann_eigs(fractal(1), 3, fractal(1).table(3).vertex_count()).unwrap())
}

fn boundary_data(k: usize) -> impl Strategy<Value = Vec<f64>> {
    let nb = fractal(k).descriptor().boundary().len();
    prop::collection::vec(-10.0f64..10.0, nb)
}

fn cell_values(k: usize, m: usize) -> impl Strategy<Value = Vec<f64>> {
    let n = fractal(k).table(m).cell_count();
    prop::collection::vec(-1.0f64..1.0, n)
}

fn vertex_values(k: usize, m: usize) -> impl Strategy<Value = Vec<f64>> {
    let n = fractal(k).table(m).vertex_count();
    prop::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn partition_covers_every_point_once(k in 0usize..3, m in 0usize..=4, seq in prop::collection::vec(0usize..64, 40)) {
        let fr = fractal(k);
        let n = fr.descriptor().branches();
        let letters: Vec<usize> = seq.iter().map(|x| x % n).collect();
        let part = fr.table(m.min(fr.max_level())).partition();
        let hits: Vec<usize> = (0..part.len())
            .filter(|&i| {
                let w = part.words()[i];
                w.letters(n).iter().zip(&letters).all(|(a, b)| a == b)
            })
            .collect();
        prop_assert_eq!(hits.len(), 1);
        prop_assert_eq!(part.locate(&letters, n), Some(hits[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gluing_order_does_not_matter(k in 1usize..3, seed in any::<u64>()) {
        let base = fractal(k).descriptor().to_document();
        let mut doc = base.clone();
        let g = doc.gluings.len();
        for i in (1..g).rev() {
            let j = (seed.rotate_left(i as u32) as usize) % (i + 1);
            doc.gluings.swap(i, j);
        }
        for (i, gl) in doc.gluings.iter_mut().enumerate() {
            if (seed >> (i % 64)) & 1 == 1 {
                *gl = [gl[2], gl[3], gl[0], gl[1]];
            }
        }
        let a = Fractal::new(&FractalDescriptor::from_document(base).unwrap(), 3).unwrap();
        let b = Fractal::new(&FractalDescriptor::from_document(doc).unwrap(), 3).unwrap();
        for m in 0..=3 {
            let (ta, tb) = (a.table(m), b.table(m));
            prop_assert_eq!(ta.vertex_count(), tb.vertex_count());
            // Same identification of cell slots up to relabelling.
            let (mut fwd, mut back) = (HashMap::new(), HashMap::new());
            for (x, y) in ta.cell_vertices().iter().zip(tb.cell_vertices()) {
                prop_assert_eq!(*fwd.entry(*x).or_insert(*y), *y);
                prop_assert_eq!(*back.entry(*y).or_insert(*x), *x);
            }
        }
    }

    #[test]
    fn energy_is_level_invariant(k in 0usize..3, b in prop::collection::vec(-10.0f64..10.0, 4)) {
        let fr = fractal(k);
        let nb = fr.descriptor().boundary().len();
        let b = &b[..nb];
        let e0 = fr.structure().energy0(&fr.structure().fill(b));
        for m in 0..=fr.max_level().min(LEVEL) {
            let h = harmonic_extend(fr, b, m).unwrap();
            let e = cell_energy(fr.descriptor(), fr.table(m), &h.values).unwrap();
            prop_assert!((e - e0).abs() <= 1e-10 * e0.max(1e-300) + 1e-13);
        }
    }

    #[test]
    fn maximum_principle(k in 0usize..3, b in boundary_data(2)) {
        let fr = fractal(k);
        let nb = fr.descriptor().boundary().len();
        let b = &b[..nb.min(b.len())];
        let lo = b.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let h = harmonic_extend(fr, b, LEVEL.min(fr.max_level())).unwrap();
        for v in h.values {
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn edge_sums_ignore_constants(k in 0usize..3, b in boundary_data(2), c in -5.0f64..5.0, s in -3.0f64..3.0, p in 1.0f64..6.0) {
        let fr = fractal(k);
        let nb = fr.descriptor().boundary().len();
        let b = &b[..nb];
        let m = 3;
        let h = harmonic_extend(fr, b, m).unwrap();
        let base = edge_sum(fr, &h, p).unwrap();
        let shifted = VertexFunction::new(m, h.values.iter().map(|x| s * x + c).collect());
        let got = edge_sum(fr, &shifted, p).unwrap();
        prop_assert!((got - s.abs().powf(p) * base).abs() <= 1e-10 * (got.abs() + 1e-12));
    }

    #[test]
    fn resistance_is_level_invariant(k in 0usize..3, x in 0usize..1000, y in 0usize..1000) {
        let fr = fractal(k);
        let m = 2;
        let n = fr.table(m).vertex_count();
        let (x, y) = (x % n, y % n);
        let r0 = ResistanceSolver::new(fr, m).unwrap().resistance(x, y).unwrap();
        for l in m + 1..=m + 2 {
            let r = ResistanceSolver::new(fr, l).unwrap().resistance(x, y).unwrap();
            prop_assert!((r - r0).abs() <= 1e-9 * r0.max(1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measures_add_up(k in 0usize..3, m in 1usize..=4) {
        let fr = fractal(k);
        let (fine, coarse) = (fr.table(m), fr.table(m - 1));
        let total: f64 = fine.partition().measures().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mut acc = vec![0.0; coarse.cell_count()];
        for (c, &p) in fine.parents().iter().enumerate() {
            acc[p as usize] += fine.partition().measures()[c];
        }
        for (a, b) in acc.iter().zip(coarse.partition().measures()) {
            prop_assert!((a - b).abs() < 1e-14);
        }
        let mass: f64 = mass_matrix(fr, m).iter().sum();
        prop_assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vertex_count_recursion(k in 0usize..3) {
        // Each gluing merges one pair of copies of V_m.
        let fr = fractal(k);
        let d = fr.descriptor();
        let (n, g) = (d.branches(), d.gluings().len());
        for m in 0..fr.max_level().min(LEVEL) {
            prop_assert_eq!(fr.table(m + 1).vertex_count(), n * fr.table(m).vertex_count() - g);
        }
    }

    #[test]
    fn seminorms_are_homogeneous_and_ignore_constants(
        c in cell_values(1, 3), s in -4.0f64..4.0, shift in -2.0f64..2.0, sigma in 0.1f64..1.2, p in 1.2f64..4.0,
    ) {
        prop_assume!(s.abs() > 1e-3);
        let fr = fractal(1);
        let f = PiecewiseHarmonic::piecewise_constant(3, 3, &c);
        let cfg = NormConfig::new(3);
        for method in [Method::Haar, Method::Graph, Method::Tent, Method::Direct] {
            let a = lambda_norm(fr, &f, method, p, 2.0, sigma, cfg).unwrap();
            let b = lambda_norm(fr, &f.scaled(s), method, p, 2.0, sigma, cfg).unwrap();
            prop_assert!((b.value - s.abs() * a.value).abs() <= 1e-9 * b.value.max(1e-300));
            prop_assert!(a.recombination_error() <= 1e-10 * a.value.max(1.0));
            let moved: Vec<f64> = c.iter().map(|x| x + shift).collect();
            let moved = PiecewiseHarmonic::piecewise_constant(3, 3, &moved);
            let d = lambda_norm(fr, &moved, method, p, 2.0, sigma, cfg).unwrap();
            prop_assert!(d.seminorm >= 0.0);
            for (t, u) in a.levels.iter().zip(&d.levels) {
                prop_assert!((t.value - u.value).abs() <= 1e-9 * t.value.max(1e-12));
            }
        }
    }

    #[test]
    fn level_terms_scale_with_sigma(v in vertex_values(1, 3), sigma in 0.1f64..1.0, ds in 0.0f64..0.5) {
        let fr = fractal(1);
        let f = PiecewiseHarmonic::from_vertex(fr.table(3), &v).unwrap();
        let cfg = NormConfig::new(3);
        let e = fr.dims().d_w / 2.0;
        for method in [Method::Haar, Method::Graph, Method::Tent] {
            let a = lambda_norm(fr, &f, method, 2.0, f64::INFINITY, sigma, cfg).unwrap();
            let b = lambda_norm(fr, &f, method, 2.0, f64::INFINITY, sigma + ds, cfg).unwrap();
            for (x, y) in a.levels.iter().zip(&b.levels) {
                let want = fr.r().powf(-(x.index as f64) * ds * e) * x.value;
                prop_assert!((y.value - want).abs() <= 1e-10 * want.max(1e-300));
            }
        }
    }

    #[test]
    fn projection_is_idempotent(c in cell_values(1, 3)) {
        let fr = fractal(1);
        let f = PiecewiseHarmonic::piecewise_constant(3, 3, &c);
        let once = project_piecewise_harmonic(fr, &f, 2);
        let twice = project_piecewise_harmonic(fr, &once.refine(fr, 3), 2);
        for (a, b) in once.values().iter().zip(twice.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expansions_telescope(v in vertex_values(2, 3)) {
        let fr = fractal(2);
        let samples = VertexFunction::new(3, v.clone());
        let series = tent_interpolation(fr, &samples).unwrap();
        for (a, b) in series.partial_sum(fr, 3).iter().zip(&v) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let f = PiecewiseHarmonic::from_vertex(fr.table(3), &v).unwrap();
        let haar = conditional_expectation(fr, &f);
        for (a, b) in haar.telescoped(fr, 3).iter().zip(&haar.expectations[3]) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_preserves_positivity_and_mass(v in vertex_values(1, 3), t in 1e-4f64..1.0) {
        let spec = gasket_spectrum();
        let f: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let u = heat_apply(spec, &f, t).unwrap();
        prop_assert!(u.iter().all(|&x| x >= -1e-10));
        let m0: f64 = f.iter().zip(&spec.mass).map(|(a, b)| a * b).sum();
        let m1: f64 = u.iter().zip(&spec.mass).map(|(a, b)| a * b).sum();
        prop_assert!((m0 - m1).abs() < 1e-10);
    }

    #[test]
    fn regions_follow_the_lines(inv_p in 0.01f64..0.99, sigma in 0.01f64..2.0, c in 0.5f64..1.5) {
        let d = fractal(1).dims();
        let p = 1.0 / inv_p;
        let pt = region_classify(d, p, sigma, c).unwrap();
        let l1 = d.d_s / p;
        match pt.region {
            Region::A1 => prop_assert!(sigma > l1 && sigma < c),
            Region::A2 => prop_assert!(sigma < l1 && sigma < c),
            Region::B => prop_assert!(sigma > l1 && sigma >= c && sigma < 2.0 - d.d_s * (1.0 - inv_p)),
            Region::AboveC => prop_assert!(sigma >= c),
            Region::OnBorder => prop_assert!((sigma - l1).abs() < 1e-8),
        }
    }
}
