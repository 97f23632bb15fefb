//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p grs-cli --test acceptance`.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use grs_core::closed_forms::{case1_entries, closed_form_entries, elliptic_phase};
use grs_core::modes::{propagate_modes, to_su2_profile, CouplingTable, ModeOptions};
use grs_core::observables::transition_probability;
use grs_core::propagator::{propagate_entries, richardson_check};
use grs_core::theta::phase_integrals;
use grs_core::*;

type Outcome = Result<String, String>;

fn oracle() -> PropagatorConfig {
    PropagatorConfig::default()
}

fn cf4() -> PropagatorConfig {
    PropagatorConfig::new(Scheme::CommutatorFree4, 1e-3)
}

fn build(params: ScenarioParams) -> Result<Scenario, String> {
    params.build().map_err(|e| e.to_string())
}

fn entries(profile: &FieldProfile, cfg: &PropagatorConfig, window: &Window) -> Result<Vec<EvolutionEntries>, String> {
    propagate_entries(profile, cfg, window).map_err(|e| e.to_string())
}

fn window(t_max: f64, samples: usize) -> Result<Window, String> {
    Window::new(t_max, samples).map_err(|e| e.to_string())
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unitarity() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, Duration::ZERO);
    let mut failures = Vec::new();
    for family in Family::CATALOG {
        let s = build(ScenarioParams::new(family))?;
        let w = window(s.default_t_max(), 5000)?;
        let start = Instant::now();
        let oracle_defect = entries(&s.profile, &oracle(), &w)?.iter().map(|e| e.unitarity_defect()).fold(0.0, f64::max);
        let oracle_time = start.elapsed();
        let start = Instant::now();
        let closed = closed_form_entries(&s, &w).map_err(|e| e.to_string())?;
        let closed_time = start.elapsed();
        let closed_defect = closed.iter().map(|e| e.unitarity_defect()).fold(0.0, f64::max);
        let slowest = oracle_time.max(closed_time);
        if oracle_defect > 1e-10 || closed_defect > 1e-12 || slowest >= Duration::from_secs(1) {
            failures.push(format!("{family}: oracle {oracle_defect:.1e}, closed {closed_defect:.1e}, {slowest:?}"));
        }
        worst = (worst.0.max(oracle_defect), worst.1.max(closed_defect), worst.2.max(slowest));
    }
    let detail = format!("oracle {:.1e} closed {:.1e} slowest {:?}", worst.0, worst.1, worst.2);
    ensure(failures.is_empty(), if failures.is_empty() { detail } else { failures.join("; ") })
}

fn sech_resonance() -> Outcome {
    let s = build(ScenarioParams::new(Family::SechResonant))?;
    let w = window(6.0, 6001)?;
    let d = entries(&s.profile, &oracle(), &w)?
        .iter()
        .map(|e| (transition_probability(e) - e.t.tanh().powi(2)).abs())
        .fold(0.0, f64::max);
    ensure(d <= 1e-6, format!("max |P - tanh^2| = {d:.2e}"))
}

fn final_probability(s: &Scenario, t_end: f64) -> Result<f64, String> {
    let e = entries(&s.profile, &oracle(), &window(t_end, 2)?)?;
    Ok(transition_probability(&e[1]))
}

fn exponential_resonance() -> Outcome {
    let full = build(ScenarioParams::new(Family::ExpResonant).with("alpha", 4.5 * PI))?;
    let none = build(ScenarioParams::new(Family::ExpResonant).with("alpha", 3.0 * PI))?;
    // γt = 20 in both cases
    let p_full = final_probability(&full, 20.0 / full.abscissa_scale())?;
    let p_none = final_probability(&none, 20.0 / none.abscissa_scale())?;
    ensure(
        (p_full - 1.0).abs() <= 1e-3 && p_none.abs() <= 1e-3,
        format!("alpha=9pi/2: P={p_full:.6}, alpha=3pi: P={p_none:.2e}"),
    )
}

fn modulated_periodicity() -> Outcome {
    let s = build(ScenarioParams::new(Family::ModulatedResonant).with("C", 1.0).with("k", 1.0).with("n", 10.0))?;
    let period = 2.0 * PI / s.abscissa_scale();
    let n = 2000;
    let e = entries(&s.profile, &cf4(), &window(2.0 * period, 2 * n + 1)?)?;
    let d = (0..=n).map(|i| (transition_probability(&e[i]) - transition_probability(&e[i + n])).abs()).fold(0.0, f64::max);
    ensure(d <= 1e-9, format!("max |P(x) - P(x+2pi)| = {d:.2e}"))
}

/// Vertex of the parabola through three equally spaced samples.
fn refine(x: f64, h: f64, y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let curvature = y0 - 2.0 * y1 + y2;
    let shift = 0.5 * (y0 - y2) / curvature;
    (x + shift * h, y1 - 0.25 * (y0 - y2) * shift)
}

fn beta0_scale_law() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for beta0 in [0.5, 1.0, 2.0] {
        let s = build(ScenarioParams::new(Family::ConstantBeta0).with("beta0", beta0).with("omega0", 1.0))?;
        let q = (1.0f64 + beta0 * beta0).sqrt();
        let w = window(10.0, 10001)?;
        let p: Vec<f64> = entries(&s.profile, &cf4(), &w)?.iter().map(transition_probability).collect();
        let h = w.spacing();
        let maxima: Vec<(f64, f64)> = (1..p.len() - 1)
            .filter(|&i| p[i] >= p[i - 1] && p[i] > p[i + 1])
            .map(|i| refine(w.time(i), h, p[i - 1], p[i], p[i + 1]))
            .collect();
        let Some(&(t_first, _)) = maxima.first() else {
            return Err(format!("beta0={beta0}: no maximum found"));
        };
        let peak_err = maxima.iter().map(|&(_, v)| (v - 1.0 / (q * q)).abs()).fold(0.0, f64::max);
        let pos_err = (q * t_first / (PI / 2.0) - 1.0).abs();
        ok &= peak_err <= 1e-6 && pos_err <= 1e-4;
        lines.push(format!("beta0={beta0}: {} maxima, peak {peak_err:.1e}, position {pos_err:.1e}", maxima.len()));
    }
    ensure(ok, lines.join("; "))
}

fn case1() -> Outcome {
    let s = build(ScenarioParams::new(Family::Case1))?;
    let t_half = 3f64.sqrt() / 2.0;
    let closed = case1_entries(&s.profile, t_half).map_err(|e| e.to_string())?.b.norm_sqr();
    let oracle_p = final_probability(&s, t_half)?;
    let p50 = case1_entries(&s.profile, 50.0).map_err(|e| e.to_string())?.b.norm_sqr();
    let p50_oracle = final_probability(&s, 50.0)?;
    let gap = 1.0 / (2.0 * (1.0 + 4.0 * 2500.0f64).sqrt());
    let mut r_err = 0.0f64;
    for tau in [0.5, 1.0, 2.0, 5.0] {
        let r = phase_integrals(&ThetaAnsatz::case1(), &s.profile, tau, 1e-12).map_err(|e| e.to_string())?.r_int;
        r_err = r_err.max((elliptic_phase(tau) + r).abs());
    }
    let checks = [
        (closed - 0.25).abs() <= 1e-9,
        (oracle_p - 0.25).abs() <= 1e-6,
        (p50 - 0.5).abs() <= 0.01 && (0.5 - p50 - gap).abs() <= 1e-6,
        (p50_oracle - 0.5).abs() <= 0.01 && (0.5 - p50_oracle - gap).abs() <= 1e-6,
        r_err <= 1e-9,
    ];
    ensure(
        checks.iter().all(|&c| c),
        format!(
            "P(sqrt3/2) closed {:.1e} oracle {:.1e}; P(50) gap err closed {:.1e} oracle {:.1e}; R err {r_err:.1e}",
            (closed - 0.25).abs(),
            (oracle_p - 0.25).abs(),
            (0.5 - p50 - gap).abs(),
            (0.5 - p50_oracle - gap).abs(),
        ),
    )
}

fn case2() -> Outcome {
    let s = build(ScenarioParams::new(Family::Case2))?;
    let d = entries(&s.profile, &oracle(), &window(20.0, 2001)?)?
        .iter()
        .map(|e| (transition_probability(e) - e.t * e.t / (1.0 + e.t * e.t)).abs())
        .fold(0.0, f64::max);
    let w = window(100.0, 2)?;
    let closed = transition_probability(&closed_form_entries(&s, &w).map_err(|e| e.to_string())?[1]);
    let numeric = transition_probability(&entries(&s.profile, &cf4(), &w)?[1]);
    ensure(
        d <= 1e-6 && closed >= 0.9999 && numeric >= 0.9999,
        format!("max |P - tau^2/(1+tau^2)| = {d:.2e}; P(100) closed {closed:.10} oracle {numeric:.10}"),
    )
}

fn split_invariance() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for family in [Family::Case1, Family::Case2] {
        let mut runs = Vec::new();
        for split in [0.0, 0.5, 1.0] {
            let s = build(ScenarioParams::new(family).with_split(split))?;
            let w = window(s.default_t_max(), 2001)?;
            runs.push(Trajectory::from_entries(&s.profile, entries(&s.profile, &oracle(), &w)?, 1.0));
        }
        for i in 0..3 {
            for j in i + 1..3 {
                let (mut moduli, mut sx) = (0.0f64, 0.0f64);
                for (x, y) in runs[i].samples.iter().zip(&runs[j].samples) {
                    let (p, q) = (&x.entries, &y.entries);
                    moduli = moduli.max((p.a.norm() - q.a.norm()).abs()).max((p.b.norm() - q.b.norm()).abs());
                    sx = sx.max((x.sigma[0] - y.sigma[0]).abs());
                }
                ok &= moduli <= 1e-6 && sx > 1e-2;
                lines.push(format!("{family} {i}/{j}: moduli {moduli:.1e} sigma_x {sx:.2}"));
            }
        }
    }
    ensure(ok, lines.join("; "))
}

fn convergence() -> Outcome {
    let s = build(ScenarioParams::new(Family::Case2))?;
    let w = window(20.0, 21)?;
    let mid = richardson_check(&s.profile, &PropagatorConfig::new(Scheme::MidpointExponential, 8e-3), &w);
    let four = richardson_check(&s.profile, &PropagatorConfig::new(Scheme::CommutatorFree4, 8e-3), &w);
    let order = |r: &propagator::ConvergenceReport| r.observed_order.unwrap_or(f64::NAN);
    ensure(
        (order(&mid) - 2.0).abs() <= 0.3 && (order(&four) - 4.0).abs() <= 0.3,
        format!("midpoint {:.3}, fourth-order {:.3}", order(&mid), order(&four)),
    )
}

fn coupling_specs() -> Result<Vec<CouplingSpec>, String> {
    let z: Vec<f64> = (0..=400).map(|i| i as f64 * 0.025).collect();
    let table = CouplingTable {
        k_re: z.iter().map(|&v| 0.6 + 0.3 * (0.5 * v).cos()).collect(),
        k_im: z.iter().map(|&v| 0.2 * (0.5 * v).sin()).collect(),
        z,
        k_ba_re: None,
        k_ba_im: None,
    };
    [
        CouplingSpec::constant(C64::new(1.0, 0.0), 0.0),
        CouplingSpec::constant(C64::new(0.4, 0.3), 0.7),
        CouplingSpec::sech(C64::new(1.0, 0.0), 1.0, 0.0),
        CouplingSpec::sech(C64::new(0.0, 1.2), 0.8, -0.5),
        CouplingSpec::from_table("table", table, 0.2),
    ]
    .into_iter()
    .map(|r| r.map_err(|e| e.to_string()))
    .collect()
}

fn coupled_modes() -> Outcome {
    let opts = ModeOptions::default();
    let unit_a = ModeState::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let k0 = 0.8;
    let spec = CouplingSpec::constant(C64::new(k0, 0.0), 0.0).map_err(|e| e.to_string())?;
    let tr = propagate_modes(&spec, unit_a, &window(PI / (2.0 * k0), 2)?, &opts).map_err(|e| e.to_string())?;
    let transfer = (tr.samples[1].power_b - 1.0).abs();
    let w = window(10.0, 401)?;
    let (mut drift, mut mapped) = (0.0f64, 0.0f64);
    for spec in coupling_specs()? {
        let mixed = ModeState::new(C64::new(0.6, 0.2), C64::new(-0.3, 0.5));
        let tr = propagate_modes(&spec, mixed, &w, &opts).map_err(|e| e.to_string())?;
        drift = drift.max(tr.max_power_drift());
        let tr = propagate_modes(&spec, unit_a, &w, &opts).map_err(|e| e.to_string())?;
        let profile = to_su2_profile(&spec, w.t_max).map_err(|e| e.to_string())?;
        let su2 = entries(&profile, &opts.propagator, &w)?;
        let d = tr.samples.iter().zip(&su2).map(|(m, e)| (m.power_b - transition_probability(e)).abs()).fold(0.0, f64::max);
        mapped = mapped.max(d);
    }
    ensure(
        transfer <= 1e-6 && drift <= 1e-10 && mapped <= 1e-10,
        format!("transfer {transfer:.1e}, power drift {drift:.1e}, mapped P {mapped:.1e}"),
    )
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_grs")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("grs {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("grs-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let config = dir.join("case1.json");
    std::fs::write(&config, r#"{"family":"case1","split_fraction":0.5,"window":{"t_max":20,"samples":2000}}"#)
        .map_err(|e| e.to_string())?;
    let config = config.to_string_lossy().into_owned();
    let mut sizes = Vec::new();
    for args in [
        vec!["run", "--config", config.as_str(), "--engine", "oracle"],
        vec!["run", "--config", config.as_str(), "--engine", "closed-form"],
        vec!["run", "--scenario", "modulated_resonant", "--engine", "oracle", "--scheme", "cf4"],
    ] {
        let first = run_cli(&args)?;
        let second = run_cli(&args)?;
        if first != second {
            return Err(format!("outputs differ for `grs {}`", args.join(" ")));
        }
        sizes.push(first.len());
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("3 configurations byte-identical ({sizes:?} bytes)"))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("AC1", "unitarity and runtime", unitarity),
        ("AC2", "sech resonance", sech_resonance),
        ("AC3", "exponential resonance", exponential_resonance),
        ("AC4", "modulated periodicity", modulated_periodicity),
        ("AC5", "beta0 scale law", beta0_scale_law),
        ("AC6", "case 1", case1),
        ("AC7", "case 2", case2),
        ("AC8", "split invariance", split_invariance),
        ("AC9", "convergence orders", convergence),
        ("AC10", "coupled modes", coupled_modes),
        ("AC11", "determinism", determinism),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        match check() {
            Ok(detail) => println!("{id} PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 11 criteria failed");
        std::process::exit(1);
    }
}
