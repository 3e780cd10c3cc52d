use std::io::Cursor;

use degree_gof::gof::{fit_logistic_null, test_dv_er, test_eg, test_her, CovariateTable, EgNull};
use degree_gof::graph::{read_edge_list, write_edge_list};
use degree_gof::models::{sample_eg, sample_her, Graphon, ProbMatrix, RngSpec};
use degree_gof::simlab::{
    build_eg_design, build_her_design, run_power_study, run_qq_study, run_size_equivalence, write_power_csv,
    write_qq_csv, write_size_csv, HerDesignSpec, PowerDesign, PowerStudy, QqStudy, SparseScenario,
};

#[test]
fn edge_list_round_trip_preserves_test() {
    let p0 = ProbMatrix::constant(40, 0.1).unwrap();
    let g = sample_her(&p0, RngSpec::new(3, 0));
    let mut buf = Vec::new();
    write_edge_list(&g, &mut buf).unwrap();
    let back = read_edge_list(Cursor::new(buf), Some(40)).unwrap();
    assert_eq!(test_her(&g, &p0, 0.05).unwrap(), test_her(&back, &p0, 0.05).unwrap());
    let dv = test_dv_er(&back, 0.05).unwrap();
    assert!((0.0..=1.0).contains(&dv.p_value));
}

#[test]
fn graphon_json_round_trip_and_eg_test() {
    let d = build_eg_design(0.1, 1.5).unwrap();
    let back = Graphon::from_json(&d.phi0.to_json()).unwrap();
    assert_eq!(back, d.phi0);
    let (g, _) = sample_eg(&d.phi, 200, RngSpec::new(9, 1));
    let direct = test_eg(&g, &back, 0.05).unwrap();
    let null = EgNull::new(back).unwrap();
    assert_eq!(null.test(&g, 0.05).unwrap(), direct);
}

#[test]
fn fitted_null_feeds_her_test() {
    let d = build_her_design(HerDesignSpec { n: 120, rho_star: 0.1, beta: 1.0 }, RngSpec::new(2, 0)).unwrap();
    let g = sample_her(&d.p, RngSpec::new(2, 1));
    let mut csv = Vec::new();
    d.edge_covariates.write_csv(&mut csv).unwrap();
    let x = CovariateTable::read_csv(Cursor::new(csv), Some(120)).unwrap();
    let fit = fit_logistic_null(&g, &x).unwrap();
    assert!(fit.converged);
    assert_eq!(fit.coefficients.len(), 4);
    let t = test_her(&g, &fit.fitted, 0.05).unwrap();
    assert!(t.p_value.is_finite());
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn study_output_is_independent_of_thread_count() {
    let power = |threads| {
        in_pool(threads, || {
            let mut out = Vec::new();
            for design in [PowerDesign::Her, PowerDesign::Eg] {
                let mut s = PowerStudy::desk_scale(design, 42);
                s.n_grid = vec![40];
                s.rho_grid = vec![0.1];
                s.beta_grid.truncate(3);
                s.replicates = 20;
                write_power_csv(&run_power_study(&s).unwrap(), &mut out).unwrap();
            }
            let q = QqStudy {
                scenarios: vec![SparseScenario::vanish(0.4), SparseScenario::thin(0.4)],
                n_grid: vec![50],
                replicates: 30,
                seed: 42,
            };
            write_qq_csv(&run_qq_study(&q).unwrap(), &mut out).unwrap();
            write_size_csv(&run_size_equivalence(&[30, 60], 0.5, 25, 0.05, 42).unwrap(), &mut out).unwrap();
            out
        })
    };
    let one = power(1);
    assert_eq!(one, power(4));
    assert_eq!(one, power(3));
}
