use crate::error::{Error, Result};
use crate::gaussian_info::{
    dominant_index, feasible_sigma12_range, gaussian_ci_synergy, gaussian_mutual_information,
    gk_synergy, gk_union_information, GaussianSystem,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub sigma12: f64,
    pub mutual_information: f64,
    pub union_information: f64,
    pub gk_synergy: f64,
    pub ci_synergy: f64,
}

pub const CURVE_HEADER: &str = "sigma12,mutual_information,union_information,gk_synergy,ci_synergy";

/// Information measures of two latents over `steps` evenly spaced interior
/// points of the feasible latent-correlation interval. The grid point
/// nearest the GK minimizer is moved onto it exactly.
pub fn synergy_curve(rho1: f64, rho2: f64, steps: usize) -> Result<Vec<CurveRow>> {
    if steps == 0 {
        return Err(Error::Config("steps must be positive".into()));
    }
    let range = feasible_sigma12_range(rho1, rho2)?;
    if range.width() <= 0.0 {
        return Err(Error::Domain(format!(
            "correlations ({rho1}, {rho2}) leave no open feasible interval"
        )));
    }
    let h = range.width() / (steps + 1) as f64;
    let mut grid: Vec<f64> = (1..=steps).map(|i| range.lo + i as f64 * h).collect();
    let rho = [rho1, rho2];
    if let Some(k) = dominant_index(&rho) {
        let minimizer = rho[1 - k] / rho[k];
        let nearest = (0..steps)
            .min_by(|&a, &b| {
                (grid[a] - minimizer)
                    .abs()
                    .total_cmp(&(grid[b] - minimizer).abs())
            })
            .expect("steps > 0");
        if (grid[nearest] - minimizer).abs() <= h {
            grid[nearest] = minimizer;
        }
    }
    let union = gk_union_information(&rho)?;
    grid.into_iter()
        .map(|s| {
            let sys = GaussianSystem::pair(rho1, rho2, s)?;
            Ok(CurveRow {
                sigma12: s,
                mutual_information: gaussian_mutual_information(&sys)?,
                union_information: union,
                gk_synergy: gk_synergy(&sys)?,
                ci_synergy: gaussian_ci_synergy(&sys)?,
            })
        })
        .collect()
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.sigma12, r.mutual_information, r.union_information, r.gk_synergy, r.ci_synergy
        ));
    }
    out
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Standalone line plot of the four measures against the latent correlation.
pub fn curve_svg(rows: &[CurveRow], rho1: f64, rho2: f64) -> String {
    let series: [(&str, &str, fn(&CurveRow) -> f64); 4] = [
        ("I(Z1,Z2;X)", "#1f77b4", |r| r.mutual_information),
        ("union information", "#2ca02c", |r| r.union_information),
        ("GK synergy", "#d62728", |r| r.gk_synergy),
        ("CI synergy", "#9467bd", |r| r.ci_synergy),
    ];
    let (x0, x1) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r.sigma12), b.max(r.sigma12))
        });
    let ymax = rows
        .iter()
        .flat_map(|r| series.iter().map(move |s| (s.2)(r)))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0).max(1e-12) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - y / ymax * (H - 2.0 * MARGIN);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">rho = ({rho1}, {rho2})</text>\n",
        W / 2.0
    );
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    ));
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{x:.3}</text>\n",
            sx(x),
            H - MARGIN + 16.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">Sigma12</text>\n\
         <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{ymax:.3} nats</text>\n",
        W / 2.0,
        H - 12.0,
        MARGIN - 4.0,
        MARGIN + 4.0
    ));
    for (i, (name, color, f)) in series.iter().enumerate() {
        let points: Vec<String> = rows
            .iter()
            .filter(|r| f(r).is_finite())
            .map(|r| format!("{:.2},{:.2}", sx(r.sigma12), sy(f(r))))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\" font-family=\"sans-serif\" font-size=\"11\">{name}</text>\n",
            points.join(" "),
            W - MARGIN - 120.0,
            MARGIN + 14.0 * i as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
