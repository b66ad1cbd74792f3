use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use cuntz_lab::attractor::{self, eigenspace};
use cuntz_lab::filterbank::{check_lowpass, check_unitary, lipschitz_m1, polyphase, synthesize_filters};
use cuntz_lab::fock::{self, coinvariant_subspace, compressed_norm, fock_wandering_check, FockVector};
use cuntz_lab::subspace::{self as sub, Window, RANK_TOL};
use cuntz_lab::wavelet::{self, CascadeOptions, SampledFunction};
use cuntz_lab::{fixtures, wold};
use cuntz_lab::{Backend, ComplexVec, FilterBank, FilterRep, LaurentPoly, MultiIndex, PolyphaseMatrix, Representation};
use cuntz_lab::{StepFunction, Subspace};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::report::{self, Envelope, Inputs};
use crate::{Command, Emit, FockCheck};

pub struct Output {
    pub text: String,
    pub pass: bool,
}

struct Outcome {
    results: Value,
    pass: bool,
    csv: Option<Vec<(f64, f64, f64)>>,
}

impl Outcome {
    fn new(results: Value, pass: bool) -> Self {
        Outcome { results, pass, csv: None }
    }
}

struct Ctx<'a> {
    cfg: &'a Config,
    tol: f64,
    inputs: Inputs,
    params: BTreeMap<String, Value>,
    tolerances: BTreeMap<String, f64>,
}

impl Ctx<'_> {
    fn param(&mut self, key: &str, value: impl Serialize) {
        self.params.insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
    }

    fn tolerance(&mut self, key: &str, value: f64) {
        self.tolerances.insert(key.to_string(), value);
    }

    fn json(&mut self, path: &Path) -> Result<Value> {
        let bytes = self.inputs.read(path)?;
        serde_json::from_slice(&bytes).with_context(|| format!("{}: malformed JSON", path.display()))
    }

    fn load<T: DeserializeOwned>(&mut self, path: &Path, what: &str) -> Result<T> {
        let v = self.json(path)?;
        typed(v, path, what)
    }

    fn bank(&mut self, path: &Path) -> Result<FilterBank> {
        self.load(path, "filter bank")
    }

    /// A bare filter bank or a `{"kind": ...}` representation.
    fn rep(&mut self, path: &Path) -> Result<Representation> {
        let v = self.json(path)?;
        let bank = match v.get("kind").and_then(Value::as_str) {
            None => v,
            Some("filter") => v.get("bank").cloned().ok_or_else(|| anyhow!("{}: missing field `bank`", path.display()))?,
            Some(_) => return typed(v, path, "representation"),
        };
        let bank: FilterBank = typed(bank, path, "filter bank")?;
        Ok(Representation::filter(bank)?)
    }

    fn vector(&mut self, path: &Path, backend: Backend) -> Result<ComplexVec> {
        let v = self.json(path)?;
        vector_of(v, backend, path)
    }

    /// `{"backend", "basis"}`; the basis is read with the backend's own vector format.
    fn subspace(&mut self, path: &Path) -> Result<Subspace> {
        let mut v = self.json(path)?;
        let backend: Backend = typed(v.get("backend").cloned().unwrap_or(Value::Null), path, "field `backend`")?;
        let basis = match v.get_mut("basis").map(Value::take) {
            Some(Value::Array(items)) => items,
            _ => bail!("{}: field `basis` must be an array of vectors", path.display()),
        };
        let vectors = basis
            .into_iter()
            .enumerate()
            .map(|(i, b)| vector_of(b, backend, path).with_context(|| format!("in `basis[{i}]`")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Subspace::span(backend, &vectors)?)
    }
}

fn typed<T: DeserializeOwned>(v: Value, path: &Path, what: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let at = e.path().to_string();
        anyhow!("{}: malformed {what} at `{at}`: {}", path.display(), e.into_inner())
    })
}

fn vector_of(v: Value, backend: Backend, path: &Path) -> Result<ComplexVec> {
    Ok(match backend {
        Backend::Laurent => typed::<LaurentPoly>(v, path, "Laurent vector")?.into(),
        Backend::Step => typed::<StepFunction>(v, path, "step function")?.into(),
        Backend::Fock => typed::<FockVector>(v, path, "Fock vector")?.into(),
    })
}

fn filter_rep(rep: &Representation) -> Result<&FilterRep> {
    rep.as_filter().ok_or_else(|| anyhow!("this command needs a filter-bank representation"))
}

/// 1 for a failed analytic precondition, 2 for everything else.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    use cuntz_lab::Error as E;
    match e.downcast_ref::<E>() {
        Some(E::NotUnitary { .. } | E::NotLowpass { .. } | E::NotCoinvariant { .. } | E::NotWandering { .. } | E::Reducing) => 1,
        _ => 2,
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| anyhow!("--lambda: cannot parse {p:?} as a number"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => bail!("--lambda: expected \"re,im\", got {s:?}"),
    }
}

fn parse_range<T: std::str::FromStr>(flag: &str, s: &str) -> Result<(T, T)> {
    let (a, b) = s.split_once(':').ok_or_else(|| anyhow!("{flag}: expected \"lo:hi\", got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<T>().map_err(|_| anyhow!("{flag}: cannot parse {x:?}"));
    Ok((p(a)?, p(b)?))
}

pub fn run(command: Command, cfg: &Config, tol: f64, emit: Emit) -> Result<Output> {
    let name = command_name(&command);
    let mut ctx = Ctx { cfg, tol, inputs: Inputs::default(), params: BTreeMap::new(), tolerances: BTreeMap::new() };
    ctx.tolerance("tol", tol);
    let outcome = match command {
        Command::CheckQmf { file, bank } => check_qmf(&mut ctx, &file.or(bank).expect("clap requires one")),
        Command::Polyphase { bank } => polyphase_cmd(&mut ctx, &bank),
        Command::Synthesize { matrix } => synthesize(&mut ctx, &matrix),
        Command::Apply { rep, word, star, vector } => apply(&mut ctx, &rep, &word, star, &vector),
        Command::Analyze { rep, subspace, depth, window } => analyze(&mut ctx, &rep, &subspace, depth, window),
        Command::Attractor { rep, depth, seeds } => attractor_cmd(&mut ctx, &rep, depth, seeds),
        Command::Eigenspace { rep, window } => eigenspace_cmd(&mut ctx, &rep, window),
        Command::Decompose { rep, subspace, depth } => decompose(&mut ctx, &rep, &subspace, depth),
        Command::Wold { rep, lambda, w, w2, n } => wold_cmd(&mut ctx, &rep, &lambda, w, w2, n),
        Command::Fock { n, depth, check } => fock_cmd(&mut ctx, n, depth, check),
        Command::Cascade { bank, iters, grid_level, refine, wavelets } => {
            cascade(&mut ctx, &bank, iters, grid_level, refine, wavelets)
        }
        Command::FrameCheck { bank, f, jrange, krange, iters } => frame_check(&mut ctx, &bank, &f, &jrange, krange, iters),
        Command::Fixtures { out } => fixtures_cmd(&mut ctx, out),
    }?;
    let text = match emit {
        Emit::Json => {
            let env = Envelope {
                command: name.to_string(),
                inputs: ctx.inputs.into_vec(),
                parameters: ctx.params,
                results: outcome.results,
                pass: outcome.pass,
                tolerances: ctx.tolerances,
            };
            report::to_json(&env)?
        }
        Emit::Csv => match outcome.csv {
            Some(rows) => report::csv_rows(&rows),
            None => bail!("--emit csv is only available for `cascade`"),
        },
    };
    Ok(Output { text, pass: outcome.pass })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::CheckQmf { .. } => "check-qmf",
        Command::Polyphase { .. } => "polyphase",
        Command::Synthesize { .. } => "synthesize",
        Command::Apply { .. } => "apply",
        Command::Analyze { .. } => "analyze",
        Command::Attractor { .. } => "attractor",
        Command::Eigenspace { .. } => "eigenspace",
        Command::Decompose { .. } => "decompose",
        Command::Wold { .. } => "wold",
        Command::Fock { .. } => "fock",
        Command::Cascade { .. } => "cascade",
        Command::FrameCheck { .. } => "frame-check",
        Command::Fixtures { .. } => "fixtures",
    }
}

fn check_qmf(ctx: &mut Ctx, path: &Path) -> Result<Outcome> {
    let bank = ctx.bank(path)?;
    let a = polyphase(&bank);
    let u = check_unitary(&a, ctx.tol);
    let l = check_lowpass(&a, ctx.tol);
    let results = json!({
        "unitary": u.pass,
        "lowpass": l.pass,
        "residuals": {
            "unitary": u.max_residual,
            "lowpass_matrix": l.matrix_deviation,
            "lowpass_filter": l.filter_deviation,
        },
        "M1": lipschitz_m1(&bank),
    });
    Ok(Outcome::new(results, u.pass && l.pass))
}

fn polyphase_cmd(ctx: &mut Ctx, path: &Path) -> Result<Outcome> {
    let bank = ctx.bank(path)?;
    Ok(Outcome::new(json!({ "polyphase": polyphase(&bank) }), true))
}

fn synthesize(ctx: &mut Ctx, path: &Path) -> Result<Outcome> {
    let a: PolyphaseMatrix = ctx.load(path, "polyphase matrix")?;
    let u = check_unitary(&a, ctx.tol);
    Ok(Outcome::new(json!({ "bank": synthesize_filters(&a), "unitary": u }), true))
}

fn apply(ctx: &mut Ctx, rep: &Path, word: &str, star: bool, vector: &Path) -> Result<Outcome> {
    let rep = ctx.rep(rep)?;
    let idx: MultiIndex = word.parse().map_err(|_| anyhow!("--word: expected comma-separated indices, got {word:?}"))?;
    idx.check(rep.n())?;
    let v = ctx.vector(vector, rep.backend())?;
    ctx.param("word", idx.as_slice());
    ctx.param("star", star);
    let out = if star { rep.apply_word_star(&idx, &v)? } else { rep.apply_word(&idx, &v)? };
    let norm = out.norm();
    Ok(Outcome::new(json!({ "vector": out, "norm": norm }), true))
}

fn window_for(rep: &Representation, window: Option<i64>) -> Result<Option<Window>> {
    Ok(match rep.backend() {
        Backend::Laurent => Some(Window::Laurent { radius: window.unwrap_or(8) }),
        Backend::Step => {
            let level = u32::try_from(window.unwrap_or(3)).map_err(|_| anyhow!("--window: step level must be nonnegative"))?;
            Some(Window::Step { n: rep.n(), level })
        }
        Backend::Fock => None,
    })
}

fn analyze(ctx: &mut Ctx, rep: &Path, subspace: &Path, depth: Option<usize>, window: Option<i64>) -> Result<Outcome> {
    let rep = ctx.rep(rep)?;
    let l = ctx.subspace(subspace)?;
    let depth = depth.or(ctx.cfg.depth).unwrap_or(4);
    let window = window_for(&rep, window.or(ctx.cfg.window))?;
    ctx.param("depth", depth);
    ctx.param("window", window);
    let tol = ctx.tol;
    let co = sub::is_coinvariant(&rep, &l, tol)?;
    let in_sl = sub::is_contained_in_sl(&rep, &l, tol)?;
    let stable = sub::is_stable(&rep, &l, tol)?;
    let wandering = sub::is_wandering(&rep, &l, depth, tol)?;
    let mut results = json!({
        "dim": l.dim(),
        "coinvariant": co,
        "contained_in_sl": in_sl,
        "stable": stable,
        "wandering": wandering,
    });
    if co.pass {
        let w = sub::wandering_part(&rep, &l)?;
        let saturation = window.as_ref().map(|win| sub::saturation_defect(&rep, &l, depth, win)).transpose()?;
        let minimality = window.as_ref().map(|win| sub::minimality_defect(&rep, &l, depth, win)).transpose()?;
        let witness = sub::invariance_witness(&rep, &l, depth)?;
        let extra = json!({
            "wandering_part": w,
            "wandering_dim": w.dim(),
            "reducing": w.is_empty(),
            "saturation_defect": saturation,
            "saturated": saturation.map(|d| d <= tol),
            "minimality_defect": minimality,
            "invariance_witness": witness,
            "pure_to_depth": witness.is_none(),
        });
        results.as_object_mut().expect("object").extend(extra.as_object().expect("object").clone());
    }
    Ok(Outcome::new(results, co.pass))
}

fn attractor_cmd(ctx: &mut Ctx, rep: &Path, depth: Option<usize>, seeds: Option<i64>) -> Result<Outcome> {
    let rep = ctx.rep(rep)?;
    let f = filter_rep(&rep)?;
    let depth = depth.or(ctx.cfg.depth).unwrap_or(6);
    ctx.param("depth", depth);
    ctx.param("seeds", seeds);
    ctx.tolerance("rank", RANK_TOL);
    let span = match seeds {
        None => attractor::attractor_span(f, depth, ctx.tol)?,
        Some(r) => attractor::attractor_from_seeds(f, &attractor::probe_seeds(r), depth, ctx.tol)?,
    };
    let eig = eigenspace(f, None)?;
    let eig_space = Subspace::from_laurent(&eig.basis)?;
    let residual = span.subspace.containment_residual(&eig_space)?;
    let contains = residual <= RANK_TOL;
    let results = json!({
        "dim": span.subspace.dim(),
        "basis": span.subspace.basis(),
        "dims": span.dims,
        "stabilized": span.stabilized,
        "stabilized_at": span.stabilized_at,
        "eigenspace_dim": eig.dim,
        "eigenspace_residual": residual,
        "contains_eigenspace": contains,
    });
    Ok(Outcome::new(results, span.stabilized))
}

fn eigenspace_cmd(ctx: &mut Ctx, rep: &Path, window: Option<i64>) -> Result<Outcome> {
    let rep = ctx.rep(rep)?;
    let f = filter_rep(&rep)?;
    let window = window.or(ctx.cfg.window);
    let e = eigenspace(f, window)?;
    ctx.param("window", e.window);
    let labels: Vec<String> = e.affine_basis.iter().map(ToString::to_string).collect();
    let pass = e.lowpass && e.global_residual <= ctx.tol;
    let mut results = serde_json::to_value(&e)?;
    results["labels"] = json!(labels);
    Ok(Outcome::new(results, pass))
}

fn decompose(ctx: &mut Ctx, rep: &Path, subspace: &Path, depth: Option<usize>) -> Result<Outcome> {
    let rep = ctx.rep(rep)?;
    let l = ctx.subspace(subspace)?;
    let depth = depth.or(ctx.cfg.depth).unwrap_or(3);
    ctx.param("depth", depth);
    let d = sub::decompose(&rep, &l, depth)?;
    let worst_inclusion = d.inclusion_residuals.iter().copied().fold(0.0, f64::max);
    let pass = d.max_overlap <= ctx.tol && worst_inclusion <= ctx.tol;
    let dims: Vec<usize> = d.layers.iter().map(Subspace::dim).collect();
    let results = json!({
        "layer_dims": dims,
        "layers": d.layers,
        "max_overlap": d.max_overlap,
        "inclusion_residuals": d.inclusion_residuals,
    });
    Ok(Outcome::new(results, pass))
}

fn wold_cmd(ctx: &mut Ctx, rep: &Path, lambda: &str, w: Option<PathBuf>, w2: Option<PathBuf>, n: usize) -> Result<Outcome> {
    let rep = ctx.rep(rep)?;
    let f = filter_rep(&rep)?.clone();
    let lambda = parse_complex(lambda)?;
    let kernel_vector = |ctx: &mut Ctx, p: Option<PathBuf>| -> Result<LaurentPoly> {
        match p {
            Some(p) => Ok(ctx.vector(&p, Backend::Laurent)?.as_laurent().expect("laurent").clone()),
            None => {
                let v = f.s(1, &LaurentPoly::e(0));
                Ok(v.scale_real(1.0 / v.norm()))
            }
        }
    };
    let w1 = kernel_vector(ctx, w)?;
    let w2 = match w2 {
        Some(p) => kernel_vector(ctx, Some(p))?,
        None => w1.clone(),
    };
    ctx.param("lambda", [lambda.re, lambda.im]);
    ctx.param("n", n);
    let ev = wold::lambda_eigenvector(&f, lambda, &w1, n)?;
    let k = wold::kernel_ip_check(&f, lambda, &w1, &w2, n)?;
    let pass = ev.pass() && k.pass;
    let results = json!({
        "eigenvector": {
            "residual": ev.residual,
            "bound": ev.bound,
            "roundoff": ev.roundoff,
            "pass": ev.pass(),
            "norm": ev.vector.norm_sqr(&f).max(0.0).sqrt(),
            "terms": ev.vector.terms.len(),
        },
        "kernel": k,
    });
    Ok(Outcome::new(results, pass))
}

fn fock_cmd(ctx: &mut Ctx, n: Option<usize>, depth: Option<usize>, check: FockCheck) -> Result<Outcome> {
    let n = n.or(ctx.cfg.n).unwrap_or(2);
    let depth = depth.or(ctx.cfg.depth).unwrap_or(4);
    ctx.param("N", n);
    ctx.param("depth", depth);
    ctx.param("check", format!("{check:?}").to_lowercase());
    let wandering = fock_wandering_check(n, depth, &[])?;
    let verdict = if wandering.pass { "pass" } else { "fail" };
    if check == FockCheck::Wandering {
        let results = json!({ "wandering": verdict, "wandering_report": wandering });
        return Ok(Outcome::new(results, wandering.pass));
    }
    let tol = ctx.tol;
    let mut norms = Vec::new();
    for d in 1..=depth {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max(compressed_norm(n, i, d)?);
        }
        norms.push(worst);
    }
    let bound = 1.0 / (n as f64).sqrt();
    let bounded = norms.iter().all(|&x| x <= bound + tol);
    let monotone = norms.windows(2).all(|p| p[1] >= p[0] - tol);
    let witness_depth = 2;
    let l = coinvariant_subspace(n, depth)?;
    let witness = sub::invariance_witness(&Representation::Fock { n }, &l, witness_depth)?;
    let results = json!({
        "compressed_norms": norms,
        "bound": bound,
        "bounded": bounded,
        "monotone": monotone,
        "witness_depth": witness_depth,
        "pure_to_depth": witness.is_none(),
        "wandering": verdict,
        "wandering_report": wandering,
    });
    let pass = bounded && monotone && witness.is_none() && wandering.pass;
    Ok(Outcome::new(results, pass))
}

fn scaling_function(bank: &FilterBank, iters: usize, grid_level: i32, refine: bool) -> Result<SampledFunction> {
    if refine {
        return Ok(wavelet::cascade_refine(bank, iters, None)?);
    }
    let mut opts = CascadeOptions::new(iters);
    opts.grid_level = grid_level;
    Ok(wavelet::cascade(bank, &opts)?)
}

fn cascade(ctx: &mut Ctx, bank: &Path, iters: Option<usize>, grid_level: i32, refine: bool, wavelets: bool) -> Result<Outcome> {
    let bank = ctx.bank(bank)?;
    let iters = iters.or(ctx.cfg.iters).unwrap_or(12);
    ctx.param("iters", iters);
    ctx.param("grid_level", grid_level);
    ctx.param("refine", refine);
    let phi = scaling_function(&bank, iters, grid_level, refine)?;
    let residual = wavelet::refinement_residual(&bank, &phi)?;
    let psis = if wavelets { Some(wavelet::wavelets_from_scaling(&bank, &phi)?) } else { None };
    let psi_norms = psis.as_ref().map(|ps| ps.iter().map(SampledFunction::norm).collect::<Vec<_>>());
    let rows = phi.rows().into_iter().map(|(x, v)| (x, v.re, v.im)).collect();
    let results = json!({
        "phi": phi,
        "norm": phi.norm(),
        "support": phi.support(),
        "refinement_residual": residual,
        "wavelets": psis,
        "wavelet_norms": psi_norms,
    });
    Ok(Outcome { results, pass: true, csv: Some(rows) })
}

fn frame_check(
    ctx: &mut Ctx,
    bank: &Path,
    f: &Path,
    jrange: &str,
    krange: Option<String>,
    iters: Option<usize>,
) -> Result<Outcome> {
    let bank = ctx.bank(bank)?;
    let f: SampledFunction = ctx.load(f, "sampled function")?;
    let j = parse_range::<i32>("--jrange", jrange)?;
    let k = krange.as_deref().map(|s| parse_range::<i64>("--krange", s)).transpose()?;
    let iters = iters.or(ctx.cfg.iters).unwrap_or(12);
    ctx.param("jrange", j);
    ctx.param("krange", k);
    ctx.param("iters", iters);
    let phi = scaling_function(&bank, iters, 0, false)?;
    let psis = wavelet::wavelets_from_scaling(&bank, &phi)?;
    let r = wavelet::bessel_sum(&psis, &f, j, k)?;
    let pass = r.sum <= r.norm2 + ctx.tol;
    let results = json!({ "sum": r.sum, "norm2": r.norm2, "gap": r.gap, "terms": r.terms, "bessel": pass });
    Ok(Outcome::new(results, pass))
}

fn fixture_files() -> Result<Vec<(&'static str, Value)>> {
    use fixtures::*;
    let step = match step_rep() {
        Representation::Step(s) => s,
        _ => unreachable!("step fixture"),
    };
    let ab = Subspace::from_step(&[step.cell_set(0), step.cell_set(1)])?;
    Ok(vec![
        ("haar.json", serde_json::to_value(haar())?),
        ("stretched.json", serde_json::to_value(stretched_haar())?),
        ("identity.json", serde_json::to_value(FilterBank::identity(2)?)?),
        ("broken.json", serde_json::to_value(broken_bank())?),
        ("base.json", serde_json::to_value(base_rep())?),
        ("step.json", serde_json::to_value(step_rep())?),
        ("fock.json", serde_json::to_value(Representation::Fock { n: 2 })?),
        ("base-core.json", serde_json::to_value(Subspace::monomials(&[-1, 0]))?),
        ("chain.json", serde_json::to_value(Subspace::monomials(&chain_fixture_indices(31)))?),
        ("step-ab.json", serde_json::to_value(ab)?),
        ("fock-coinvariant.json", serde_json::to_value(fock::coinvariant_subspace(2, 2)?)?),
        ("indicator.json", serde_json::to_value(SampledFunction::indicator(2, 0, 1)?)?),
    ])
}

fn fixtures_cmd(ctx: &mut Ctx, out: Option<PathBuf>) -> Result<Outcome> {
    let checks = fixtures::reference_checks()?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut written = Vec::new();
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (name, value) in fixture_files()? {
            let path = dir.join(name);
            std::fs::write(&path, report::to_json(&value)?).with_context(|| format!("cannot write {}", path.display()))?;
            written.push(name);
        }
    }
    ctx.param("out", out.map(|p| p.display().to_string()));
    let results = json!({ "checks": checks, "failed": failed, "written": written });
    Ok(Outcome::new(results, failed == 0))
}
