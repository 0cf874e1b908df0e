//! Acceptance gate: one PASS/FAIL line per criterion with its tolerance and runtime.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use exotic::algebra::rational::int;
use exotic::algebra::Rational;
use exotic::dynamics::{d2_evaluation, lemma6_check};
use exotic::equivariant::{equivariant_cohomology, CartanComplex};
use exotic::exact_sequence::theorem1_sequence;
use exotic::flat::{exotic_homology, flat_subcomplex, invariant_subcomplex, lemma1_check};
use exotic::fock::identities::run_identities;
use exotic::fock::{Form, MultiVector};
use exotic::model::Model;
use exotic::problem::Problem;
use exotic::spectral::{perturbed_homology_compare, spectral_sequence, PerturbedComplex, SpectralReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODELS: [&str; 6] = ["torus1", "torus2", "torus3", "heisenberg3", "heisenberg5", "abelian3"];
const SPECTRAL_RUNS: [&str; 6] = [
  "ss_heisenberg3_e3",
  "ss_heisenberg5_e5",
  "ss_torus2_contract",
  "ss_torus2_dx1",
  "ss_heisenberg3_e1",
  "ss_heisenberg3_contract",
];

fn data(path: &str) -> PathBuf { PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(path) }

fn problem(name: &str) -> Problem { Problem::load(&data(&format!("problems/{name}.json"))).unwrap() }

struct Verdict {
  id:      usize,
  name:    &'static str,
  pass:    bool,
  detail:  String,
  elapsed: Duration,
  limit:   Option<Duration>,
}

fn criterion(id: usize, name: &'static str, limit: Option<f64>, body: impl FnOnce() -> (bool, String)) -> Verdict {
  let start = Instant::now();
  let (pass, detail) = body();
  let elapsed = start.elapsed();
  let limit = limit.map(Duration::from_secs_f64);
  let pass = pass && limit.is_none_or(|l| elapsed < l);
  Verdict { id, name, pass, detail, elapsed, limit }
}

fn spectral_run(name: &str) -> (SpectralReport, PerturbedComplex, Problem) {
  let p = problem(name);
  let dp = p.perturbed_d().unwrap().unwrap();
  let t = flat_subcomplex(&p.model, &dp).unwrap();
  let c = PerturbedComplex::from_flat(&p.model, &t, &dp.perturbation().unwrap()).unwrap();
  let (r, _) = spectral_sequence(&c, None).unwrap();
  (r, c, p)
}

fn identities() -> (bool, String) {
  let mut worst = Duration::ZERO;
  let mut failures = Vec::new();
  for m in MODELS {
    let start = Instant::now();
    let p = problem(&format!("identities_{m}"));
    let dp = p.perturbed_d().unwrap().unwrap();
    let r = run_identities(&p.model, &p.forms, &p.multivectors, Some(&dp)).unwrap();
    let has_square = r.checks.iter().any(|c| c.name.starts_with("(d')^2"));
    if !r.all_pass || !has_square {
      failures.push(m);
    }
    let t = start.elapsed();
    worst = worst.max(t);
    if t >= Duration::from_secs(1) {
      failures.push(m);
    }
  }
  (failures.is_empty(), format!("{} models, slowest {:.3} s per model (limit 1 s), failing {failures:?}", MODELS.len(), worst.as_secs_f64()))
}

fn reeb_kernel() -> (bool, String) {
  let mut dims = Vec::new();
  let mut pass = true;
  for name in ["heisenberg3", "heisenberg5", "torus3"] {
    let p = problem(name);
    let spec = p.file.exotic.as_ref().unwrap().lemma1.as_ref().unwrap();
    let r = lemma1_check(&p.model, p.form(&spec.omega).unwrap(), p.multivector(&spec.reeb).unwrap()).unwrap();
    pass &= r.pass && r.degree_zero_vanishes && r.degree_one_is_reeb_kernel && r.higher_degrees_full;
    dims.push((name, r.dims));
  }
  pass &= dims[0].1 == vec![0, 2, 3, 1];
  (pass, format!("T dims {dims:?}"))
}

fn exact_sequence() -> (bool, String) {
  let mut pass = true;
  let mut out = Vec::new();
  for (name, expected) in [("heisenberg3", vec![1, 1, 2, 2, 1, 3, 2]), ("torus3", vec![1, 9, 10, 3, 9, 11, 3])] {
    let p = problem(name);
    let spec = p.file.exact_seq.as_ref().unwrap();
    let r = theorem1_sequence(&p.model, p.form(&spec.omega).unwrap(), p.multivector(&spec.reeb).unwrap(), None).unwrap();
    let dims: Vec<usize> = r.nodes.iter().take(7).map(|n| n.dim).collect();
    let all_exact = r.exactness.iter().all(|e| e.exact) && r.exactness.len() == 7;
    pass &= dims == expected && all_exact && r.alternating_sum == 0 && r.section_independent && r.theta_variation.is_some();
    out.push(format!("{name} {dims:?} exact={all_exact} alt={} theta-independent={}", r.alternating_sum, r.section_independent));
  }
  (pass, out.join("; "))
}

fn spectral_suite(runs: &BTreeMap<&str, SpectralReport>) -> (bool, String) {
  let h3 = &runs["ss_heisenberg3_e3"];
  let e2 = &h3.pages[1];
  let all_reversing = h3.pages.iter().flat_map(|p| &p.differentials).filter(|b| b.rank > 0).all(|b| b.parity_reversing);
  let i = (e2.even, e2.odd) == (3, 3) && h3.pages.len() >= 3 && h3.pages[2].total == 0 && h3.e_infinity_total == 0 && all_reversing;

  let h5 = &runs["ss_heisenberg5_e5"];
  let ii = h5.pages.iter().skip(2).flat_map(|p| &p.differentials).all(|b| b.rank == 0);

  let t2 = &runs["ss_torus2_contract"];
  let iii = t2.e_infinity_total == 0
    && t2.pages.iter().all(|p| {
      let expected = 3 - 2 * p.page as i64;
      p.shift == expected && p.differentials.iter().all(|b| b.observed_shifts.iter().all(|&s| s == expected))
    });
  let iv = runs.values().all(|r| r.euler_constant && r.squares_vanish && r.recursion_holds);
  (
    i && ii && iii && iv,
    format!("h3 E2=({},{}) E_inf={} reversing={all_reversing}; h5 higher d zero={ii}; T2 shift k-2l+3={iii}; euler constant={iv}", e2.even, e2.odd, h3.e_infinity_total),
  )
}

fn comparison(runs: &BTreeMap<&str, (SpectralReport, PerturbedComplex, Problem)>) -> (bool, String) {
  let mut pass = true;
  let mut out = Vec::new();
  for (name, (r, c, p)) in runs {
    let samples: Vec<Rational> = p.file.ss.as_ref().unwrap().samples.iter().map(|s| s.parse().unwrap()).collect();
    let cmp = perturbed_homology_compare(c, &samples, r.e_infinity_total).unwrap();
    pass &= cmp.pass && cmp.samples.len() >= 3;
    out.push(format!("{name}: min {} = E_inf {}", cmp.min_total, cmp.e_infinity_total));
  }
  (pass, out.join("; "))
}

fn massey(runs: &BTreeMap<&str, SpectralReport>) -> (bool, String) {
  let checked: usize = runs.values().map(|r| r.massey.classes_checked).sum();
  let agreed: usize = runs.values().map(|r| r.massey.agreements).sum();
  let pass = runs.values().all(|r| r.massey.mismatches.is_empty() && r.massey.classes_checked == r.massey.agreements) && checked > 0;
  (pass, format!("{agreed}/{checked} page classes agree over {} runs", runs.len()))
}

fn dynamics() -> (bool, String) {
  let mut pass = true;
  for n in 1..=3 {
    let m = Model::build_torus_model(n, &vec![(-1, 1); n]).unwrap();
    let r = lemma6_check(&m, &MultiVector::constant_field(&vec![int(0); n])).unwrap();
    pass &= r.lemma6 == "pass" && r.d2_rank == 0;
  }
  let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
  let mut agreed = 0;
  for trial in 0..100 {
    let n = if trial % 2 == 0 { 2 } else { 3 };
    let m = Model::build_torus_model(n, &vec![(-1, 1); n]).unwrap();
    let mut draw = || Rational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into());
    let a: Vec<Rational> = (0..n).map(|_| draw()).collect();
    let u_coeffs: Vec<Rational> = (0..n).map(|_| draw()).collect();
    let u = u_coeffs
      .iter()
      .enumerate()
      .fold(Form::zero(n), |acc, (i, c)| acc.plus(&Form::basic(n, &[i + 1]).unwrap().scaled(c)));
    let value = d2_evaluation(&m, &MultiVector::constant_field(&a), &u).unwrap();
    let pairing = u_coeffs.iter().zip(&a).fold(Rational::from_integer(0.into()), |acc, (x, y)| acc + x * y);
    if value == pairing {
      agreed += 1;
    }
  }
  pass &= agreed == 100;
  (pass, format!("lemma6 pass for X = 0 on T1..T3; pairing law {agreed}/100 random (u, X) on T2, T3"))
}

fn equivariant() -> (bool, String) {
  let t1 = Model::build_torus_model(1, &[(-1, 1)]).unwrap();
  let circle = equivariant_cohomology(&CartanComplex::build(&t1, &[MultiVector::constant_field(&[int(1)])], 4).unwrap()).unwrap();
  let point = circle.dims.len() == 7 && circle.dims[0] == 1 && circle.dims[1..].iter().all(|&d| d == 0);

  let zero = MultiVector::constant_field(&[int(0)]);
  let trivial = equivariant_cohomology(&CartanComplex::build(&t1, &[zero.clone()], 3).unwrap()).unwrap();
  let h = exotic_homology(&invariant_subcomplex(&t1, &zero).unwrap(), &[]).unwrap().dims();
  let tensor: Vec<usize> = (0..=trivial.truncation_safe_through as i64)
    .map(|t| (0..=t / 2).map(|p| h.get(&(t - 2 * p)).copied().unwrap_or(0)).sum())
    .collect();
  let tensor_ok = trivial.dims == tensor;

  let mut stable = true;
  for name in ["equivariant_circle", "equivariant_trivial", "equivariant_torus2_partial", "equivariant_torus2_free"] {
    let p = problem(name);
    let spec = p.file.equivariant.as_ref().unwrap();
    let fields: Vec<MultiVector> = spec.fields.iter().map(|f| p.multivector(f).unwrap().clone()).collect();
    let d = spec.cutoff.unwrap();
    let a = equivariant_cohomology(&CartanComplex::build(&p.model, &fields, d).unwrap()).unwrap();
    let b = equivariant_cohomology(&CartanComplex::build(&p.model, &fields, d + 1).unwrap()).unwrap();
    stable &= b.dims[..a.dims.len()] == a.dims[..];
  }
  (point && tensor_ok && stable, format!("circle {:?}; trivial {:?} = tensor count {tensor:?}; D vs D+1 stable={stable}", circle.dims, trivial.dims))
}

fn run_cli(args: &[&str], threads: &str) -> Vec<u8> {
  let out = Command::new(env!("CARGO_BIN_EXE_exotic")).args(args).env("RAYON_NUM_THREADS", threads).output().unwrap();
  out.stdout
}

fn determinism() -> (bool, String) {
  let mut jobs: Vec<(&str, String)> = Vec::new();
  for entry in std::fs::read_dir(data("problems")).unwrap() {
    let path = entry.unwrap().path();
    let stem = path.file_stem().unwrap().to_str().unwrap().to_string();
    let command = match stem.split('_').next().unwrap() {
      "identities" => "identities",
      "ss" => "ss",
      "dynamics" => "dynamics",
      "equivariant" => "equivariant",
      _ => "exotic",
    };
    jobs.push((command, path.to_str().unwrap().to_string()));
    jobs.push(("validate", path.to_str().unwrap().to_string()));
    if ["heisenberg3", "torus3"].contains(&stem.as_str()) {
      jobs.push(("exact-seq", path.to_str().unwrap().to_string()));
    }
  }
  jobs.sort();
  let mut mismatches = Vec::new();
  for (command, path) in &jobs {
    let args = [*command, path.as_str()];
    let first = run_cli(&args, "1");
    if first.is_empty() || first != run_cli(&args, "1") || first != run_cli(&args, "4") {
      mismatches.push(format!("{command} {path}"));
    }
  }
  (mismatches.is_empty(), format!("{} command runs byte-identical across repeats and 1 vs 4 threads; mismatches {mismatches:?}", jobs.len()))
}

#[test]
fn acceptance() {
  let mut verdicts = vec![
    criterion(1, "fermionic identity suite", None, identities),
    criterion(2, "Reeb kernel subcomplex suite", Some(5.0), reeb_kernel),
    criterion(3, "exact sequence suite", Some(10.0), exact_sequence),
  ];
  let start = Instant::now();
  let runs: BTreeMap<&str, (SpectralReport, PerturbedComplex, Problem)> =
    SPECTRAL_RUNS.iter().map(|&name| (name, spectral_run(name))).collect();
  let build = start.elapsed().as_secs_f64();
  let reports: BTreeMap<&str, SpectralReport> = runs.iter().map(|(k, v)| (*k, v.0.clone())).collect();
  verdicts.push(criterion(4, "spectral suite", Some(10.0 - build), || spectral_suite(&reports)));
  verdicts.push(criterion(5, "E_inf vs perturbed homology", Some(10.0), || comparison(&runs)));
  verdicts.push(criterion(6, "Massey cross-check", None, || massey(&reports)));
  verdicts.push(criterion(7, "dynamics", None, dynamics));
  verdicts.push(criterion(8, "equivariant", Some(5.0), equivariant));
  verdicts.push(criterion(9, "determinism", None, determinism));
  verdicts[3].elapsed += Duration::from_secs_f64(build);

  for v in &verdicts {
    let limit = v.limit.map_or("none".to_string(), |l| format!("< {:.1} s", l.as_secs_f64()));
    println!(
      "{} criterion {}: {} | tolerance exact | runtime {:.3} s (limit {limit}) | {}",
      if v.pass { "PASS" } else { "FAIL" },
      v.id,
      v.name,
      v.elapsed.as_secs_f64(),
      v.detail
    );
  }
  let failed: Vec<usize> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
  assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
