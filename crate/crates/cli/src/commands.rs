use std::fs::{self, File};
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};

use degree_gof::gof::{fit_logistic_null, test_dv_er, test_eg, test_her, CovariateTable, LogisticNull, TestResult};
use degree_gof::graph::{read_edge_list, write_edge_list, Graph};
use degree_gof::models::{sample_eg, sample_her, Graphon, ProbMatrix, RngSpec};
use degree_gof::numeric::fmt_sig10;
use degree_gof::simlab::{
    linspace, run_power_study, run_qq_study, run_size_equivalence, write_power_csv, write_qq_csv, write_size_csv,
    PowerDesign, PowerStudy, QqStudy, SparseScenario,
};

use crate::config::{Config, Resolved};
use crate::error::CliError;
use crate::output::Outputs;

/// Replicate counts below which study results are too noisy to compare
/// with analytic curves; smaller runs still go ahead, with a warning.
pub const ADVISED_POWER_REPLICATES: usize = 100;
pub const ADVISED_QQ_REPLICATES: usize = 200;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Common {
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Common {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path, n: Option<usize>) -> Result<Graph, CliError> {
    read_edge_list(open(path)?, n).map_err(|e| CliError::from(e).in_file(path))
}

fn read_matrix(path: &Path) -> Result<ProbMatrix, CliError> {
    ProbMatrix::read_csv(open(path)?).map_err(|e| CliError::from(e).in_file(path))
}

fn read_graphon(path: &Path) -> Result<Graphon, CliError> {
    Graphon::from_json(&read_text(path)?).map_err(|e| CliError::from(e).in_file(path))
}

fn read_covariates(path: &Path) -> Result<CovariateTable, CliError> {
    CovariateTable::read_csv(open(path)?, None).map_err(|e| CliError::from(e).in_file(path))
}

fn check_alpha(alpha: f64) -> Result<f64, CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(CliError::Usage(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory");
    buf
}

/// A model file is a graphon if it holds a JSON object, a probability
/// matrix otherwise.
fn looks_like_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

pub fn sample(model: &Path, n: Option<usize>, common: &Common) -> Result<String, CliError> {
    let text = read_text(model)?;
    let seed = common.seed.unwrap_or(0);
    let spec = RngSpec::new(seed, 0);
    let dir = common.out_dir();
    let mut outputs = Outputs::default();
    let mut resolved = Resolved::default();
    resolved.set("sample", "model", model.display()).set("sample", "seed", seed);
    let graph = if looks_like_json(&text) {
        let phi = Graphon::from_json(&text).map_err(|e| CliError::from(e).in_file(model))?;
        let n = n.ok_or_else(|| CliError::Usage("--n is required to sample from a graphon".into()))?;
        let (g, u) = sample_eg(&phi, n, spec);
        let mut latent = String::from("node,u\n");
        for (i, x) in u.iter().enumerate() {
            latent.push_str(&format!("{i},{}\n", fmt_sig10(*x)));
        }
        outputs.add(dir.join("sample.latent.csv"), latent.into_bytes());
        resolved.set("sample", "kind", "graphon");
        g
    } else {
        let p = ProbMatrix::read_csv(text.as_bytes()).map_err(|e| CliError::from(e).in_file(model))?;
        if let Some(n) = n.filter(|&n| n != p.n()) {
            return Err(CliError::Usage(format!("--n {n} conflicts with the {}-node matrix", p.n())));
        }
        resolved.set("sample", "kind", "matrix");
        sample_her(&p, spec)
    };
    resolved.set("sample", "n", graph.n());
    outputs.add(dir.join("sample.edges"), csv_bytes(|b| write_edge_list(&graph, b)));
    outputs.add(dir.join("sample.config"), resolved.render().into_bytes());
    let summary = format!("sampled {} nodes, {} edges\n", graph.n(), graph.edge_count());
    let paths: Vec<String> = outputs.paths().map(|p| p.display().to_string()).collect();
    outputs.commit()?;
    Ok(format!("{summary}wrote {}\n", paths.join(", ")))
}

/// `er`, `her:<matrix.csv>`, `eg:<graphon.json>` or `covariates:<cov.csv>`.
#[derive(Debug, Clone, PartialEq)]
pub enum NullSpec {
    Er,
    Her(PathBuf),
    Eg(PathBuf),
    Covariates(PathBuf),
}

impl std::str::FromStr for NullSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "er" {
            return Ok(NullSpec::Er);
        }
        let (kind, path) = s
            .split_once(':')
            .ok_or_else(|| format!("`{s}`: expected er, her:FILE, eg:FILE or covariates:FILE"))?;
        if path.is_empty() {
            return Err(format!("`{s}`: missing file name"));
        }
        let path = PathBuf::from(path);
        match kind {
            "her" => Ok(NullSpec::Her(path)),
            "eg" => Ok(NullSpec::Eg(path)),
            "covariates" => Ok(NullSpec::Covariates(path)),
            _ => Err(format!("`{kind}`: unknown null model; expected er, her, eg or covariates")),
        }
    }
}

fn fit_lines(fit: &LogisticNull) -> String {
    let mut s = String::new();
    for (k, (b, se)) in fit.coefficients.iter().zip(&fit.std_errors).enumerate() {
        let name = if k == 0 { "intercept".to_owned() } else { format!("x{k}") };
        s.push_str(&format!("coef_{name} = {} (se {})\n", fmt_sig10(*b), fmt_sig10(*se)));
    }
    s.push_str(&format!(
        "fit_iterations = {}\nfit_converged = {}\nfit_score_norm = {}\n",
        fit.iterations,
        fit.converged,
        fmt_sig10(fit.score_norm)
    ));
    s
}

fn result_lines(r: &TestResult) -> String {
    format!(
        "statistic = {}\nnull_mean = {}\nnull_sd = {}\nz = {}\np_value = {}\nalpha = {}\ndecision = {}\n",
        fmt_sig10(r.statistic),
        fmt_sig10(r.null_mean),
        fmt_sig10(r.null_sd),
        fmt_sig10(r.z),
        fmt_sig10(r.p_value),
        r.alpha,
        if r.reject { "reject" } else { "do not reject" }
    )
}

pub fn test(graph_path: &Path, null: &NullSpec, nodes: Option<usize>, common: &Common) -> Result<String, CliError> {
    let alpha = check_alpha(common.alpha.unwrap_or(DEFAULT_ALPHA))?;
    let mut resolved = Resolved::default();
    resolved.set("test", "graph", graph_path.display()).set("test", "alpha", alpha);
    let mut extra = String::new();
    let (g, result, label) = match null {
        NullSpec::Er => {
            let g = read_graph(graph_path, nodes)?;
            let r = test_dv_er(&g, alpha)?;
            (g, r, "er (degree variance, plug-in density)".to_owned())
        }
        NullSpec::Her(path) => {
            let p0 = read_matrix(path)?;
            check_nodes(nodes, p0.n())?;
            let g = read_graph(graph_path, Some(p0.n()))?;
            let r = test_her(&g, &p0, alpha)?;
            (g, r, format!("her:{}", path.display()))
        }
        NullSpec::Eg(path) => {
            let phi0 = read_graphon(path)?;
            let g = read_graph(graph_path, nodes)?;
            let r = test_eg(&g, &phi0, alpha)?;
            (g, r, format!("eg:{}", path.display()))
        }
        NullSpec::Covariates(path) => {
            let x = read_covariates(path)?;
            check_nodes(nodes, x.n())?;
            let g = read_graph(graph_path, Some(x.n()))?;
            let fit = fit_logistic_null(&g, &x)?;
            extra = fit_lines(&fit);
            let r = test_her(&g, &fit.fitted, alpha)?;
            (g, r, format!("covariates:{}", path.display()))
        }
    };
    resolved.set("test", "null", &label).set("test", "n", g.n());
    let report = format!(
        "null = {label}\nn = {}\nedges = {}\n{extra}{}",
        g.n(),
        g.edge_count(),
        result_lines(&result)
    );
    if let Some(dir) = &common.out {
        let mut outputs = Outputs::default();
        outputs.add(dir.join("test.report"), report.clone().into_bytes());
        outputs.add(dir.join("test.config"), resolved.render().into_bytes());
        outputs.commit()?;
    }
    Ok(report)
}

fn check_nodes(nodes: Option<usize>, model_n: usize) -> Result<(), CliError> {
    match nodes {
        Some(n) if n != model_n => Err(CliError::Usage(format!("--nodes {n} conflicts with the {model_n}-node null model"))),
        _ => Ok(()),
    }
}

pub fn fit_null(graph_path: &Path, covariates: &Path, common: &Common) -> Result<String, CliError> {
    let x = read_covariates(covariates)?;
    let g = read_graph(graph_path, Some(x.n()))?;
    let fit = fit_logistic_null(&g, &x)?;
    let mut table = String::from("term,estimate,std_error\n");
    for (k, (b, se)) in fit.coefficients.iter().zip(&fit.std_errors).enumerate() {
        let name = if k == 0 { "intercept".to_owned() } else { format!("x{k}") };
        table.push_str(&format!("{name},{},{}\n", fmt_sig10(*b), fmt_sig10(*se)));
    }
    let mut resolved = Resolved::default();
    resolved
        .set("fit-null", "graph", graph_path.display())
        .set("fit-null", "covariates", covariates.display())
        .set("fit-null", "n", g.n())
        .set("fit-null", "covariate_count", x.d());
    let dir = common.out_dir();
    let mut outputs = Outputs::default();
    outputs.add(dir.join("fit.csv"), table.into_bytes());
    outputs.add(dir.join("null_matrix.csv"), csv_bytes(|b| fit.fitted.write_csv(b)));
    outputs.add(dir.join("fit.config"), resolved.render().into_bytes());
    outputs.commit()?;
    Ok(fit_lines(&fit))
}

fn warn_small(replicates: usize, advised: usize) {
    if replicates < advised {
        eprintln!("warning: {replicates} replicates per cell; at least {advised} are advised");
    }
}

fn seed_of(cfg: &Config, key: &str, common: &Common) -> Result<u64, CliError> {
    Ok(match common.seed {
        Some(s) => s,
        None => cfg.get(key)?.unwrap_or(0),
    })
}

fn alpha_of(cfg: &Config, key: &str, common: &Common) -> Result<f64, CliError> {
    let a = match common.alpha {
        Some(a) => a,
        None => cfg.get(key)?.unwrap_or(DEFAULT_ALPHA),
    };
    check_alpha(a)
}

fn load_config(path: &Path, allowed: &[&str]) -> Result<Config, CliError> {
    let cfg = Config::parse(&read_text(path)?).map_err(|e| e.in_file(path))?;
    cfg.check_keys(allowed).map_err(|e| e.in_file(path))?;
    Ok(cfg)
}

fn nonempty<T>(values: Vec<T>, key: &str) -> Result<Vec<T>, CliError> {
    if values.is_empty() {
        Err(CliError::Usage(format!("`{key}` must not be empty")))
    } else {
        Ok(values)
    }
}

pub const POWER_KEYS: &[&str] = &[
    "study.design",
    "study.replicates",
    "study.alpha",
    "study.seed",
    "grid.n",
    "grid.rho_star",
    "grid.beta",
];

pub fn power(config: &Path, common: &Common) -> Result<String, CliError> {
    let cfg = load_config(config, POWER_KEYS)?;
    let design = match cfg.get_str("study.design") {
        Some("her") => PowerDesign::Her,
        Some("eg") => PowerDesign::Eg,
        Some(other) => return Err(CliError::Usage(format!("study.design = `{other}`: expected her or eg"))),
        None => return Err(CliError::Usage("study.design is required (her or eg)".into())),
    };
    let seed = seed_of(&cfg, "study.seed", common)?;
    let mut study = PowerStudy::desk_scale(design, seed);
    study.alpha = alpha_of(&cfg, "study.alpha", common)?;
    if let Some(r) = cfg.get("study.replicates")? {
        study.replicates = r;
    }
    if let Some(v) = cfg.get_list("grid.n")? {
        study.n_grid = nonempty(v, "grid.n")?;
    }
    if let Some(v) = cfg.get_list("grid.rho_star")? {
        study.rho_grid = nonempty(v, "grid.rho_star")?;
    }
    if let Some(v) = cfg.get_list("grid.beta")? {
        study.beta_grid = nonempty(v, "grid.beta")?;
    }
    warn_small(study.replicates, ADVISED_POWER_REPLICATES);
    let rows = run_power_study(&study)?;

    let mut resolved = Resolved::default();
    resolved
        .set("study", "design", design)
        .set("study", "replicates", study.replicates)
        .set("study", "alpha", study.alpha)
        .set("study", "seed", seed)
        .set_list("grid", "n", &study.n_grid)
        .set_list("grid", "rho_star", &study.rho_grid)
        .set_list("grid", "beta", &study.beta_grid);
    let dir = common.out_dir();
    let mut outputs = Outputs::default();
    outputs.add(dir.join("power.csv"), csv_bytes(|b| write_power_csv(&rows, b)));
    outputs.add(dir.join("power.config"), resolved.render().into_bytes());
    outputs.commit()?;
    Ok(format!("{} power cells written to {}\n", rows.len(), dir.join("power.csv").display()))
}

pub const QQ_KEYS: &[&str] = &[
    "study.replicates",
    "study.seed",
    "grid.n",
    "scenarios.vanish",
    "scenarios.thin",
    "scenarios.rho_star",
];

pub fn qq(config: &Path, common: &Common) -> Result<String, CliError> {
    let cfg = load_config(config, QQ_KEYS)?;
    let seed = seed_of(&cfg, "study.seed", common)?;
    let replicates = cfg.get("study.replicates")?.unwrap_or(500);
    let n_grid = nonempty(cfg.get_list("grid.n")?.unwrap_or_else(|| vec![100, 1000]), "grid.n")?;
    let rho_star: f64 = cfg.get("scenarios.rho_star")?.unwrap_or(0.1);
    let default_exponents = linspace(0.0, 1.6, 5);
    let (vanish, thin) = if cfg.has("scenarios.vanish") || cfg.has("scenarios.thin") {
        (
            cfg.get_list("scenarios.vanish")?.unwrap_or_default(),
            cfg.get_list("scenarios.thin")?.unwrap_or_default(),
        )
    } else {
        (default_exponents.clone(), default_exponents)
    };
    if vanish.is_empty() && thin.is_empty() {
        return Err(CliError::Usage("no sparse scenarios given".into()));
    }
    let scenarios: Vec<SparseScenario> = vanish
        .iter()
        .map(|&a| SparseScenario { rho_star, ..SparseScenario::vanish(a) })
        .chain(thin.iter().map(|&b| SparseScenario { rho_star, ..SparseScenario::thin(b) }))
        .collect();
    warn_small(replicates, ADVISED_QQ_REPLICATES);
    let study = QqStudy {
        scenarios,
        n_grid: n_grid.clone(),
        replicates,
        seed,
    };
    let cells = run_qq_study(&study)?;

    let mut resolved = Resolved::default();
    resolved
        .set("study", "replicates", replicates)
        .set("study", "seed", seed)
        .set_list("grid", "n", &n_grid)
        .set_list("scenarios", "vanish", &vanish)
        .set_list("scenarios", "thin", &thin)
        .set("scenarios", "rho_star", rho_star);
    let dir = common.out_dir();
    let mut outputs = Outputs::default();
    outputs.add(dir.join("qq.csv"), csv_bytes(|b| write_qq_csv(&cells, b)));
    outputs.add(dir.join("qq.config"), resolved.render().into_bytes());
    outputs.commit()?;
    let mut summary = String::new();
    for c in &cells {
        summary.push_str(&format!(
            "n = {}, {} {}: KS = {}\n",
            c.n,
            c.scenario.kind,
            c.scenario.exponent,
            fmt_sig10(c.ks_distance)
        ));
    }
    Ok(summary)
}

pub const SIMULATE_KEYS: &[&str] = &["study.replicates", "study.alpha", "study.seed", "grid.n", "grid.p"];

pub fn simulate(config: &Path, common: &Common) -> Result<String, CliError> {
    let cfg = load_config(config, SIMULATE_KEYS)?;
    let seed = seed_of(&cfg, "study.seed", common)?;
    let alpha = alpha_of(&cfg, "study.alpha", common)?;
    let replicates = cfg.get("study.replicates")?.unwrap_or(500);
    let n_grid = nonempty(cfg.get_list("grid.n")?.unwrap_or_else(|| vec![100, 316, 1000]), "grid.n")?;
    let p: f64 = cfg.get("grid.p")?.unwrap_or(0.5);
    let rows = run_size_equivalence(&n_grid, p, replicates, alpha, seed)?;

    let mut resolved = Resolved::default();
    resolved
        .set("study", "replicates", replicates)
        .set("study", "alpha", alpha)
        .set("study", "seed", seed)
        .set_list("grid", "n", &n_grid)
        .set("grid", "p", p);
    let dir = common.out_dir();
    let mut outputs = Outputs::default();
    outputs.add(dir.join("size.csv"), csv_bytes(|b| write_size_csv(&rows, b)));
    outputs.add(dir.join("size.config"), resolved.render().into_bytes());
    outputs.commit()?;
    let mut summary = String::new();
    for r in &rows {
        summary.push_str(&format!(
            "n = {}: mean |z_V - z_W| = {}, size V = {}, size W = {}\n",
            r.n,
            fmt_sig10(r.mean_abs_gap),
            r.size_v,
            r.size_w
        ));
    }
    Ok(summary)
}

/// Writes `text` to stdout, ignoring a closed pipe.
pub fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_spec_parsing() {
        assert_eq!("er".parse::<NullSpec>(), Ok(NullSpec::Er));
        assert_eq!("her:a.csv".parse::<NullSpec>(), Ok(NullSpec::Her("a.csv".into())));
        assert_eq!("eg:g.json".parse::<NullSpec>(), Ok(NullSpec::Eg("g.json".into())));
        assert_eq!("covariates:c:d.csv".parse::<NullSpec>(), Ok(NullSpec::Covariates("c:d.csv".into())));
        for bad in ["", "her", "her:", "sbm:x", "ER"] {
            assert!(bad.parse::<NullSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn json_sniffing() {
        assert!(looks_like_json("  \n{\"kind\": \"constant\"}"));
        assert!(!looks_like_json("3\n0,1,1\n"));
    }
}
