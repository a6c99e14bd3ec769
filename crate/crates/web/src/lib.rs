//! Browser bindings. Every export returns a JSON string so the page can
//! stay plain JavaScript; errors come back as the message text.

use discrim_core::bigpowers::{threshold_report, PaddedWordSpec};
use discrim_core::eoc::{EocGroup, EocSpec, StageSpec};
use discrim_core::freewords::parse_word;
use discrim_core::retraction::{apply_all, minimal_discriminating_p, SearchOptions, ThetaSpec};
use discrim_core::zdiscrim::{sandwich_row, BallSpec};
use serde_json::json;
use wasm_bindgen::prelude::*;

// Keeps a click in the page under a second or so.
const ZN_CAP: u128 = 20_000_000;
const MAX_WEB_RADIUS: u32 = 3;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Lower bound, exact minimum and θ complexity for R = 0..=rmax.
#[wasm_bindgen]
pub fn zn_table(n: usize, rmax: u32, boxed: bool) -> Result<String, String> {
    if n == 0 {
        return Err("n must be at least 1".into());
    }
    let mut rows = Vec::new();
    for r in 0..=rmax {
        let ball = if boxed { BallSpec::boxed(r) } else { BallSpec::l1(r) };
        match sandwich_row(n, ball, ZN_CAP) {
            Ok(row) => rows.push(json!({
                "R": r,
                "lower": format!("{}/{}", row.lower_bound_num, row.lower_bound_den),
                "exact": row.exact_min,
                "upper": row.theta_upper,
                "witness": row.witness,
                "holds": row.holds(),
            })),
            // Show what fit in the budget.
            Err(_) if !rows.is_empty() => break,
            Err(e) => return Err(err(e)),
        }
    }
    Ok(json!(rows).to_string())
}

/// Normal form of `word` in F_2 *_<u> (<u> x Z^rank), and its image under
/// the least retraction that is injective on the ball of radius `radius`.
#[wasm_bindgen]
pub fn retract(u: &str, rank: u32, radius: u32, word: &str) -> Result<String, String> {
    if radius > MAX_WEB_RADIUS {
        return Err(format!("radius is limited to {MAX_WEB_RADIUS} here"));
    }
    let group = EocGroup::new(EocSpec {
        free_rank: 2,
        stages: vec![StageSpec { u: parse_word(u).map_err(err)?, rank }],
    })
    .map_err(err)?;
    let x = group.parse(word).map_err(err)?;
    let rec = minimal_discriminating_p(&group, 0, radius, SearchOptions::default()).map_err(err)?;
    let exps = ThetaSpec { stage: 0, radius, p: rec.p_min }
        .exponents(rank as usize)
        .map_err(err)?;
    let image = apply_all(&group, std::slice::from_ref(&exps), &x).map_err(err)?;
    Ok(json!({
        "normal_form": group.serialize(&x),
        "p_min": rec.p_min,
        "exponents": exps,
        "complexity": rec.complexity,
        "ball_size": rec.ball_size,
        "image": image.to_string(),
        "image_len": image.len(),
    })
    .to_string())
}

/// Threshold for u and the words gs, separated by `;`.
#[wasm_bindgen]
pub fn bigpowers(u: &str, gs: &str) -> Result<String, String> {
    let gs = gs
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_word)
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let spec = PaddedWordSpec::new(parse_word(u).map_err(err)?, gs).map_err(err)?;
    let report = threshold_report(&spec).map_err(err)?;
    serde_json::to_string(&report).map_err(err)
}
