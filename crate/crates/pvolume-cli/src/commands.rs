//! One function per subcommand, each rendering an [`Outputs`] bundle.

use pvolume::ccsolve::{threshold_solution, GridControl, NodalLine, SolveRequest};
use pvolume::levy_keller::{a_expansion, alpha_beta, delta_m0, m_expansion, u_expansion, AsymptoticExpansion};
use pvolume::potentials::{adiabatic_series_oracle, multipole_model, ChannelSet, Model, Multipole};
use pvolume::refpairs::Bc;
use pvolume::scan::{label_resonances, scan_x00, uniform_grid, Resonance, ScanCurve, ScanOptions};
use pvolume::units::{c6_from_atomic, dipole_strength_to_ru, make_unit_system, mass_from_dalton, polarizability_from_atomic};
use pvolume::volfit::{fit_with_basis, log_grid, m_trace, VolumeConfig};
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::output::{jnum, jopt, json_text, sci, Csv, Outputs};
use crate::repro;
use crate::CliError;

const CONTROL_KEYS: [&str; 6] = ["gamma_e", "gamma_l", "gamma_i", "mode", "rtol", "atol"];

/// Keys that determine a command's result; they feed the configuration hash.
pub fn result_keys(command: &str) -> Vec<&'static str> {
    let mut k: Vec<&'static str> = match command {
        "units" => vec!["mu", "c6", "alpha1", "alpha2", "dipole", "laser", "intensity"],
        "coeffs" => vec!["model", "m", "intensity", "oracle"],
        "lk" => vec!["model", "m", "intensity", "bc", "c3f", "m0"],
        "solve" => [&["m", "intensity", "x00", "n", "bc", "xmax"][..], &CONTROL_KEYS].concat(),
        "fit" => [&["m", "intensity", "x00", "n", "bc", "xmax_lo", "xmax_hi", "points"][..], &CONTROL_KEYS].concat(),
        "scan" => [
            &["m", "intensity", "n", "bc", "x00_lo", "x00_hi", "points", "label", "refine_tol", "tracking_tol", "xmax_lo", "xmax_hi"][..],
            &CONTROL_KEYS,
        ]
        .concat(),
        "repro table3" => [&["intensity", "n", "points", "x00_lo", "x00_hi", "xmax_lo", "xmax_hi"][..], &CONTROL_KEYS].concat(),
        "repro fig1" => vec!["x00_lo", "x00_hi", "points"],
        "repro fig2" => [
            &["m", "intensity", "bc", "n_max", "x00_lo", "x00_hi", "points", "refine_tol", "tracking_tol", "xmax_lo", "xmax_hi"][..],
            &CONTROL_KEYS,
        ]
        .concat(),
        _ => vec![],
    };
    k.push("format");
    k
}

pub fn default_format(command: &str) -> Format {
    match command {
        "solve" | "fit" => Format::Json,
        _ => Format::Csv,
    }
}

/// Commands whose results are cached on disk.
pub fn cacheable(command: &str) -> bool {
    matches!(command, "fit" | "scan" | "repro table3" | "repro fig1" | "repro fig2")
}

pub fn execute(command: &str, c: &RunConfig, hash: &str) -> Result<Outputs, CliError> {
    let fmt = c.format.unwrap_or_else(|| default_format(command));
    match command {
        "units" => units(c, fmt),
        "coeffs" => coeffs(c, fmt, hash),
        "lk" => lk(c, fmt, hash),
        "solve" => solve(c, fmt, hash),
        "fit" => fit(c, fmt, hash),
        "scan" => scan(c, fmt, hash),
        "repro table3" => table3(c, fmt, hash),
        "repro fig1" => fig1(c, fmt, hash),
        "repro fig2" => fig2(c, fmt, hash),
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}

fn units(c: &RunConfig, fmt: Format) -> Result<Outputs, CliError> {
    let u = make_unit_system(
        mass_from_dalton(c.mu),
        c6_from_atomic(c.c6),
        polarizability_from_atomic(c.alpha1),
        polarizability_from_atomic(c.alpha2),
    )?;
    // a laser intensity fixes the reduced one; otherwise report the laser needed for it
    let (reduced, laser) = match c.laser {
        Some(l) if l >= 0.0 => (u.intensity_to_ru(l), l),
        Some(l) => return Err(pvolume::Error::Domain(format!("laser intensity must be non-negative, got {l}")).into()),
        None => (c.intensity, u.intensity_from_ru(c.intensity)),
    };
    let mut pairs: Vec<(&str, f64)> = vec![
        ("sigma_m", u.sigma),
        ("sigma_bohr", u.sigma / pvolume::units::BOHR),
        ("epsilon_j", u.epsilon),
        ("epsilon_hartree", u.epsilon / pvolume::units::HARTREE),
        ("beta_w_per_m2", u.beta_intensity),
        ("intensity_ru", reduced),
        ("laser_w_per_m2", laser),
    ];
    if let Some(d) = c.dipole {
        pairs.push(("dipole_intensity_ru", dipole_strength_to_ru(d, &u)?));
    }
    let primary = match fmt {
        Format::Csv => pairs.iter().map(|(k, v)| format!("{k}={}\n", sci(*v))).collect(),
        Format::Json => json_text(&Value::Object(pairs.iter().map(|(k, v)| (k.to_string(), jnum(*v))).collect())),
    };
    Ok(Outputs { primary, ..Default::default() })
}

fn potential(c: &RunConfig) -> Result<Multipole<f64>, CliError> {
    if c.oracle && c.model != Model::Diabatic {
        return Ok(adiabatic_series_oracle(c.m, c.intensity, c.model == Model::Nonadiabatic)?);
    }
    Ok(multipole_model(c.model, c.m, c.intensity)?)
}

fn coeffs(c: &RunConfig, fmt: Format, hash: &str) -> Result<Outputs, CliError> {
    let v = potential(c)?;
    let primary = match fmt {
        Format::Csv => {
            let mut csv = Csv::new("coeffs", hash, &["model", "m", "intensity", "c2", "c3", "c4", "c5", "c6"]);
            csv.row(&[
                c.model.to_string(),
                c.m.to_string(),
                sci(c.intensity),
                sci(v.c2),
                sci(v.c3),
                sci(v.c4),
                sci(v.c5),
                sci(v.c6),
            ]);
            csv.finish()
        }
        Format::Json => json_text(&json!({
            "config_sha256": hash, "model": c.model.to_string(), "m": c.m, "intensity": jnum(c.intensity),
            "c2": jnum(v.c2), "c3": jnum(v.c3), "c4": jnum(v.c4), "c5": jnum(v.c5), "c6": jnum(v.c6),
        })),
    };
    Ok(Outputs { primary, ..Default::default() })
}

fn lk(c: &RunConfig, fmt: Format, hash: &str) -> Result<Outputs, CliError> {
    let v = potential(c)?;
    let c3f = c.c3f.unwrap_or(v.c3.abs());
    let f = if c.bc == Bc::Bc2 { 0.0 } else { c3f };
    let mut rows: Vec<(&str, String, f64)> = Vec::new();
    let mut push = |series: &'static str, e: &AsymptoticExpansion<f64>| {
        for (b, x) in &e.terms {
            rows.push((series, b.tag().to_string(), *x));
        }
    };
    push("M", &m_expansion(&v, c.bc, f, c.m0)?);
    push("A", &a_expansion(&v, c.bc, f)?);
    push("u", &u_expansion(&v, c.bc, f, c.m0)?);
    let (a, b) = alpha_beta(&v, c.bc, f)?;
    rows.push(("M", "alpha".into(), a));
    rows.push(("M", "beta".into(), b));
    if c3f > 0.0 {
        rows.push(("M", "delta_m0".into(), delta_m0(v.c3, v.c4, c3f)?));
    }
    let primary = match fmt {
        Format::Csv => {
            let mut csv = Csv::new("lk", hash, &["series", "term", "coefficient"]);
            for (s, t, x) in &rows {
                csv.row(&[s.to_string(), t.clone(), sci(*x)]);
            }
            csv.finish()
        }
        Format::Json => {
            let mut series = Map::new();
            for (s, t, x) in &rows {
                series
                    .entry(s.to_string())
                    .or_insert_with(|| Value::Object(Map::new()))
                    .as_object_mut()
                    .expect("series are objects")
                    .insert(t.clone(), jnum(*x));
            }
            json_text(&json!({
                "config_sha256": hash, "model": c.model.to_string(), "m": c.m, "intensity": jnum(c.intensity),
                "bc": c.bc.to_string(), "c3f": jnum(f), "m0": jnum(c.m0), "series": series,
            }))
        }
    };
    Ok(Outputs { primary, ..Default::default() })
}

fn control(c: &RunConfig) -> GridControl<f64> {
    GridControl { rtol: c.rtol, atol: c.atol, mode: c.mode, ..GridControl::default() }
}

fn volume_config(c: &RunConfig, xmax_points: usize) -> VolumeConfig<f64> {
    VolumeConfig {
        grid: log_grid(c.xmax_lo, c.xmax_hi, xmax_points),
        control: control(c),
        gamma_e: c.gamma_e,
        gamma_l: c.gamma_l,
        gamma_i: c.gamma_i,
        ..VolumeConfig::new(c.m, c.intensity, c.n, c.bc)
    }
}

fn check_range(name: &str, lo: f64, hi: f64, points: usize, min_points: usize) -> Result<(), CliError> {
    if !(lo < hi) || !(lo > 0.0) {
        return Err(pvolume::Error::Domain(format!("{name} range [{lo}, {hi}] must be positive and ascending")).into());
    }
    if points < min_points {
        return Err(pvolume::Error::Domain(format!("{name} grid needs at least {min_points} points, got {points}")).into());
    }
    Ok(())
}

fn solve(c: &RunConfig, fmt: Format, hash: &str) -> Result<Outputs, CliError> {
    let req = SolveRequest {
        channels: ChannelSet::new(c.m, c.n)?,
        intensity: c.intensity,
        nodal: NodalLine { x00: c.x00, gamma_e: c.gamma_e, gamma_l: c.gamma_l, gamma_i: c.gamma_i },
        bc: c.bc,
        x_max: c.xmax,
        control: control(c),
    };
    let s = threshold_solution(&req)?;
    let ells = req.channels.ells();
    let primary = match fmt {
        Format::Json => json_text(&json!({
            "config_sha256": hash, "m": c.m, "intensity": jnum(c.intensity), "x00": jnum(c.x00), "n": c.n,
            "bc": c.bc.to_string(), "x_max": jnum(s.x_max), "M": jnum(s.m_at_xmax),
            "mbar": s.mbar.iter().map(|v| jnum(*v)).collect::<Vec<_>>(),
            "channels": ells,
            "channel_values": s.channel_values.iter().map(|v| jnum(*v)).collect::<Vec<_>>(),
            "condition": jnum(s.condition), "amplitude_sign": s.amplitude_sign,
        })),
        Format::Csv => {
            let mut csv = Csv::new("solve", hash, &["channel", "l", "mbar", "nodal_value"]);
            for (j, l) in ells.iter().enumerate() {
                csv.row(&[(j + 1).to_string(), l.to_string(), sci(s.mbar[j]), sci(s.channel_values[j])]);
            }
            csv.finish()
        }
    };
    Ok(Outputs { primary, ..Default::default() })
}

fn fit(c: &RunConfig, fmt: Format, hash: &str) -> Result<Outputs, CliError> {
    let points = c.points.unwrap_or(50);
    check_range("x_max", c.xmax_lo, c.xmax_hi, points, 2)?;
    let cfg = volume_config(c, points);
    let trace = m_trace(&cfg, c.x00)?;
    let mut csv = Csv::new("fit", hash, &["x_max", "M"]);
    for (x, m) in &trace.samples {
        csv.row(&[sci(*x), sci(*m)]);
    }
    let trace_csv = csv.finish();
    let f = fit_with_basis(&trace, &cfg.basis(), cfg.residual_threshold, cfg.max_condition)?;
    let coefficients: Map<String, Value> = f.coefficients.iter().map(|(b, x)| (b.tag().to_string(), jnum(*x))).collect();
    let fit_json = json_text(&json!({
        "config_sha256": hash, "m": c.m, "intensity": jnum(c.intensity), "x00": jnum(c.x00), "n": c.n,
        "bc": c.bc.to_string(), "volume": jnum(f.volume), "eta": jnum(f.eta), "coefficients": coefficients,
        "residual_rms": jnum(f.residual_rms), "condition": jnum(f.condition),
    }));
    let mut out = Outputs::default();
    out.primary = match fmt {
        Format::Json => fit_json,
        Format::Csv => trace_csv.clone(),
    };
    out.artifacts.insert("trace".into(), trace_csv);
    Ok(out)
}

fn scan_options(c: &RunConfig) -> ScanOptions<f64> {
    ScanOptions { refine_tol: c.refine_tol, tracking_tol: c.tracking_tol, ..ScanOptions::default() }
}

fn resonance_json(r: &Resonance<f64>) -> Value {
    json!({
        "position": jnum(r.position),
        "bracket": [jnum(r.bracket.0), jnum(r.bracket.1)],
        "label": r.label,
        "n_appear": r.n_appear,
        "sides": [r.sides.0, r.sides.1],
        "neighbors": r.neighbors.map(|((xl, ml), (xr, mr))| json!([[jnum(xl), jnum(ml)], [jnum(xr), jnum(mr)]])),
        "width": jopt(r.width),
        "ambiguous": r.ambiguous,
    })
}

fn status(p: &pvolume::scan::ScanPoint<f64>) -> &'static str {
    if p.diagnostic.is_some() {
        "failed"
    } else if p.pole {
        "pole"
    } else {
        "ok"
    }
}

/// CSV fields for one curve point: M0 blank unless finite, poles bracketed by grid neighbors.
fn curve_fields(curve: &ScanCurve<f64>, i: usize) -> [String; 5] {
    let p = &curve.points[i];
    let ok = status(p) == "ok";
    let (lo, hi) = if p.pole {
        let lo = if i > 0 { curve.points[i - 1].axis } else { p.axis };
        let hi = curve.points.get(i + 1).map_or(p.axis, |q| q.axis);
        (sci(lo), sci(hi))
    } else {
        (String::new(), String::new())
    };
    [sci(p.axis), if ok { sci(p.m0) } else { String::new() }, u8::from(p.pole).to_string(), lo, hi]
}

fn gnuplot_blocks(curve: &ScanCurve<f64>, res: &[Resonance<f64>]) -> String {
    let mut s = String::new();
    let mut open = false;
    for (i, p) in curve.points.iter().enumerate() {
        if status(p) != "ok" {
            if open {
                s.push('\n');
                open = false;
            }
            continue;
        }
        if i > 0 && open {
            let prev = curve.points[i - 1].axis;
            if res.iter().any(|r| r.position > prev && r.position < p.axis) {
                s.push('\n');
            }
        }
        s.push_str(&format!("{} {}\n", sci(p.axis), sci(p.m0)));
        open = true;
    }
    s
}

fn scan(c: &RunConfig, fmt: Format, hash: &str) -> Result<Outputs, CliError> {
    let points = c.points.unwrap_or(150);
    check_range("x00", c.x00_lo, c.x00_hi, points, 2)?;
    let cfg = volume_config(c, 50);
    let grid = uniform_grid(c.x00_lo, c.x00_hi, points);
    let opts = scan_options(c);
    let (curve, res) = if c.label {
        let mut l = label_resonances(&cfg, &grid, c.n, &opts)?;
        (l.curves.pop().expect("n >= 1"), l.per_n.pop().expect("n >= 1"))
    } else {
        scan_x00(&cfg, &grid, &opts)?
    };
    for p in curve.points.iter().filter(|p| p.diagnostic.is_some()) {
        log::warn!("x00 = {}: {}", p.axis, p.diagnostic.as_deref().unwrap_or_default());
    }
    let res_json = json_text(&Value::Array(res.iter().map(resonance_json).collect()));
    let primary = match fmt {
        Format::Csv => {
            let mut csv = Csv::new("scan", hash, &["x00", "M0", "pole_flag", "bracket_lo", "bracket_hi", "status"]);
            for i in 0..curve.points.len() {
                let f = curve_fields(&curve, i);
                csv.row(&[&f[0], &f[1], &f[2], &f[3], &f[4], status(&curve.points[i])]);
            }
            csv.finish()
        }
        Format::Json => json_text(&json!({
            "config_sha256": hash, "m": c.m, "intensity": jnum(c.intensity), "n": c.n, "bc": c.bc.to_string(),
            "curve": curve.points.iter().map(|p| json!({
                "x00": jnum(p.axis), "M0": jnum(p.m0), "pole": p.pole, "status": status(p),
                "diagnostic": p.diagnostic,
            })).collect::<Vec<_>>(),
            "resonances": serde_json::from_str::<Value>(&res_json).expect("valid JSON"),
        })),
    };
    let mut out = Outputs { primary, ..Default::default() };
    out.artifacts.insert("resonances".into(), res_json);
    out.artifacts.insert("gnuplot".into(), format!("# x00 M0\n{}", gnuplot_blocks(&curve, &res)));
    Ok(out)
}

fn table3(c: &RunConfig, fmt: Format, hash: &str) -> Result<Outputs, CliError> {
    let points = c.points.unwrap_or(24);
    check_range("x00", c.x00_lo, c.x00_hi, points, 10)?;
    let base = volume_config(c, 50);
    let blocks = repro::table3(&base, &repro::candidates(c.x00_lo, c.x00_hi, points))?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, sci);
    let primary = match fmt {
        Format::Csv => {
            let mut csv =
                Csv::new("repro table3", hash, &["intensity", "m", "bc", "quantity", "fitted", "spread", "analytic", "samples"]);
            for b in &blocks {
                for r in &b.rows {
                    csv.row(&[
                        sci(b.intensity),
                        b.m.to_string(),
                        b.bc.to_string(),
                        r.quantity.to_string(),
                        opt(r.fitted),
                        opt(r.spread),
                        opt(r.analytic),
                        b.samples.to_string(),
                    ]);
                }
            }
            csv.finish()
        }
        Format::Json => json_text(&json!({
            "config_sha256": hash,
            "blocks": blocks.iter().map(|b| json!({
                "intensity": jnum(b.intensity), "m": b.m, "bc": b.bc.to_string(), "samples": b.samples,
                "rows": b.rows.iter().map(|r| json!({
                    "quantity": r.quantity, "fitted": jopt(r.fitted), "spread": jopt(r.spread), "analytic": jopt(r.analytic),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })),
    };
    Ok(Outputs { primary, ..Default::default() })
}

fn fig1(c: &RunConfig, fmt: Format, hash: &str) -> Result<Outputs, CliError> {
    let points = c.points.unwrap_or(150);
    check_range("x00", c.x00_lo, c.x00_hi, points, 2)?;
    let rows = repro::fig1(&uniform_grid(c.x00_lo, c.x00_hi, points));
    let opt = |v: Option<f64>| v.map_or_else(String::new, sci);
    let primary = match fmt {
        Format::Csv => {
            let mut csv = Csv::new("repro fig1", hash, &["x00", "a", "volume_p", "length_p", "value_f", "length_f"]);
            for r in &rows {
                csv.row(&[sci(r.x00), opt(r.a), opt(r.volume_p), opt(r.length_p), opt(r.value_f), opt(r.length_f)]);
            }
            csv.finish()
        }
        Format::Json => json_text(&json!({
            "config_sha256": hash,
            "points": rows.iter().map(|r| json!({
                "x00": jnum(r.x00), "a": jopt(r.a), "volume_p": jopt(r.volume_p), "length_p": jopt(r.length_p),
                "value_f": jopt(r.value_f), "length_f": jopt(r.length_f),
            })).collect::<Vec<_>>(),
        })),
    };
    let mut gp = String::from("# x00 a volume_p length_f\n");
    for r in &rows {
        gp.push_str(&format!("{} {} {} {}\n", sci(r.x00), opt(r.a), opt(r.volume_p), opt(r.length_f)));
    }
    let mut out = Outputs { primary, ..Default::default() };
    out.artifacts.insert("gnuplot".into(), gp);
    Ok(out)
}

fn fig2(c: &RunConfig, fmt: Format, hash: &str) -> Result<Outputs, CliError> {
    let points = c.points.unwrap_or(150);
    check_range("x00", c.x00_lo, c.x00_hi, points, 2)?;
    let base = volume_config(c, 50);
    let grid = uniform_grid(c.x00_lo, c.x00_hi, points);
    let l = repro::fig2(&base, &grid, c.n_max, &scan_options(c))?;
    let res_json = json_text(&Value::Array(
        l.per_n
            .iter()
            .enumerate()
            .map(|(i, r)| json!({"n": i + 1, "resonances": r.iter().map(resonance_json).collect::<Vec<_>>()}))
            .collect(),
    ));
    let primary = match fmt {
        Format::Csv => {
            let mut csv =
                Csv::new("repro fig2", hash, &["n", "x00", "M0", "pole_flag", "bracket_lo", "bracket_hi", "status"]);
            for (k, curve) in l.curves.iter().enumerate() {
                for i in 0..curve.points.len() {
                    let f = curve_fields(curve, i);
                    csv.row(&[&(k + 1).to_string(), &f[0], &f[1], &f[2], &f[3], &f[4], status(&curve.points[i])]);
                }
            }
            csv.finish()
        }
        Format::Json => json_text(&json!({
            "config_sha256": hash, "m": c.m, "intensity": jnum(c.intensity), "bc": c.bc.to_string(),
            "curves": l.curves.iter().map(|curve| json!({
                "n": curve.n,
                "points": curve.points.iter().map(|p| json!({"x00": jnum(p.axis), "M0": jnum(p.m0), "pole": p.pole, "status": status(p)})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "resonances": serde_json::from_str::<Value>(&res_json).expect("valid JSON"),
        })),
    };
    // one gnuplot index per n
    let gp: Vec<String> = l
        .curves
        .iter()
        .zip(&l.per_n)
        .map(|(curve, res)| format!("# n = {}\n{}", curve.n, gnuplot_blocks(curve, res)))
        .collect();
    let mut out = Outputs { primary, ..Default::default() };
    out.artifacts.insert("resonances".into(), res_json);
    out.artifacts.insert("gnuplot".into(), gp.join("\n\n"));
    Ok(out)
}
