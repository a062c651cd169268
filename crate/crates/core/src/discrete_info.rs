//! Exact information measures on small, fully enumerated joint distributions
//! over latents `Z_1..Z_m` and one target `X`.
//!
//! Tables are dense and row-major over `(z_1, ..., z_m, x)` with `x` varying
//! fastest. All values are in nats with `0 ln 0 = 0`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Largest number of latents a joint may enumerate.
pub const MAX_LATENTS: usize = 12;

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Dense probability table over `(z_1, ..., z_m, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    arities: Vec<usize>,
    probs: Vec<f64>,
}

impl DiscreteJoint {
    /// `arities` lists the alphabet size of every latent followed by the target.
    pub fn new(arities: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if arities.len() < 2 {
            return Err(Error::Domain(
                "a joint needs at least one latent and a target".into(),
            ));
        }
        if arities.len() - 1 > MAX_LATENTS {
            return Err(Error::Domain(format!(
                "{} latents exceed the enumeration bound of {MAX_LATENTS}",
                arities.len() - 1
            )));
        }
        if arities.contains(&0) {
            return Err(Error::Domain(
                "every alphabet needs at least one symbol".into(),
            ));
        }
        let size: usize = arities.iter().product();
        if probs.len() != size {
            return Err(Error::Shape(format!(
                "table has {} entries, arities {arities:?} need {size}",
                probs.len()
            )));
        }
        check_distribution(&probs)?;
        Ok(Self { arities, probs })
    }

    /// Builds a table by evaluating `f` at every configuration `(z.., x)`.
    pub fn from_fn(arities: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let size: usize = arities.iter().product();
        let mut probs = Vec::with_capacity(size);
        let mut config = vec![0; arities.len()];
        for index in 0..size {
            decode(index, &arities, &mut config);
            probs.push(f(&config));
        }
        Self::new(arities, probs)
    }

    /// `X = Z_1 xor Z_2` with independent fair inputs.
    pub fn xor() -> Self {
        Self::from_fn(
            vec![2, 2, 2],
            |c| if c[0] ^ c[1] == c[2] { 0.25 } else { 0.0 },
        )
        .expect("xor table is valid")
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_latents(&self) -> usize {
        self.arities.len() - 1
    }

    fn target_arity(&self) -> usize {
        self.arities[self.num_latents()]
    }

    /// Marginal over `vars` (variable indices, target = `num_latents()`),
    /// row-major in the order given.
    pub fn marginal(&self, vars: &[usize]) -> Vec<f64> {
        let sub: Vec<usize> = vars.iter().map(|&v| self.arities[v]).collect();
        let mut out = vec![0.0; sub.iter().product()];
        let mut config = vec![0; self.arities.len()];
        for (index, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            decode(index, &self.arities, &mut config);
            let mut slot = 0;
            for (&v, &a) in vars.iter().zip(&sub) {
                slot = slot * a + config[v];
            }
            out[slot] += p;
        }
        out
    }

    /// Parses the plain-text format: one configuration per line, the latent
    /// values then the target value then the probability, separated by
    /// whitespace. `#` starts a comment. Missing configurations have
    /// probability zero. Alphabet sizes are the largest value seen plus one,
    /// at least two.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, Vec<usize>, f64)> = Vec::new();
        let mut width = None;
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let start = offset;
            offset += line.len();
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() < 3 {
                return Err(Error::Parse {
                    offset: start,
                    message: "expected at least one latent, the target and a probability".into(),
                });
            }
            match width {
                None => width = Some(fields.len()),
                Some(w) if w != fields.len() => {
                    return Err(Error::Parse {
                        offset: start,
                        message: format!("expected {w} fields, found {}", fields.len()),
                    })
                }
                _ => {}
            }
            let (values, prob) = fields.split_at(fields.len() - 1);
            let config = values
                .iter()
                .map(|v| v.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    offset: start,
                    message: format!("bad variable value: {e}"),
                })?;
            let p: f64 = prob[0].parse().map_err(|e| Error::Parse {
                offset: start,
                message: format!("bad probability {:?}: {e}", prob[0]),
            })?;
            rows.push((start, config, p));
        }
        let width = width.ok_or(Error::Parse {
            offset: 0,
            message: "no configurations".into(),
        })?;
        let mut arities = vec![2; width - 1];
        for (_, config, _) in &rows {
            for (a, &v) in arities.iter_mut().zip(config) {
                *a = (*a).max(v + 1);
            }
        }
        let size: usize = arities.iter().product();
        let mut probs = vec![0.0; size];
        let mut seen = vec![false; size];
        for (start, config, p) in rows {
            let index = encode(&config, &arities);
            if seen[index] {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("configuration {config:?} listed twice"),
                });
            }
            seen[index] = true;
            probs[index] = p;
        }
        Self::new(arities, probs)
    }

    /// Writes the nonzero configurations in the plain-text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut config = vec![0; self.arities.len()];
        for (index, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            decode(index, &self.arities, &mut config);
            for v in &config {
                let _ = write!(out, "{v} ");
            }
            let _ = writeln!(out, "{p:?}");
        }
        out
    }
}

fn decode(mut index: usize, arities: &[usize], config: &mut [usize]) {
    for (slot, &a) in config.iter_mut().zip(arities).rev() {
        *slot = index % a;
        index /= a;
    }
}

fn encode(config: &[usize], arities: &[usize]) -> usize {
    config
        .iter()
        .zip(arities)
        .fold(0, |acc, (&v, &a)| acc * a + v)
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Domain(format!(
            "probability {bad} is negative or not finite"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Domain(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

fn plogp_sum(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Shannon entropy of a probability vector.
pub fn entropy(marginal: &[f64]) -> Result<f64> {
    check_distribution(marginal)?;
    Ok(plogp_sum(marginal))
}

/// `I(Z_group; X)` by exact marginalization.
pub fn mutual_information(joint: &DiscreteJoint, group: &[usize]) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::Domain(
            "mutual information needs a nonempty group".into(),
        ));
    }
    let m = joint.num_latents();
    for (i, &g) in group.iter().enumerate() {
        if g >= m {
            return Err(Error::Domain(format!(
                "latent index {g} out of range for {m} latents"
            )));
        }
        if group[..i].contains(&g) {
            return Err(Error::Domain(format!("latent index {g} repeated")));
        }
    }
    let mut with_target = group.to_vec();
    with_target.push(m);
    let h_z = plogp_sum(&joint.marginal(group));
    let h_x = plogp_sum(&joint.marginal(&[m]));
    let h_zx = plogp_sum(&joint.marginal(&with_target));
    Ok((h_z + h_x - h_zx).max(0.0))
}

/// Total correlation `sum_j H(Z_j) - H(Z_1..Z_m)` of the latents, with the
/// target marginalized out.
pub fn total_correlation(joint: &DiscreteJoint) -> f64 {
    let m = joint.num_latents();
    let latents: Vec<usize> = (0..m).collect();
    let singles: f64 = (0..m).map(|j| plogp_sum(&joint.marginal(&[j]))).sum();
    (singles - plogp_sum(&joint.marginal(&latents))).max(0.0)
}

/// `p_CI(x | z)` for every latent configuration, row-major over `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CiDecoderTable {
    pub latent_arities: Vec<usize>,
    pub target_arity: usize,
    /// `None` where both `p(z)` and `p_CI(z)` vanish.
    pub rows: Vec<Option<Vec<f64>>>,
}

impl CiDecoderTable {
    pub fn row(&self, config: &[usize]) -> Option<&[f64]> {
        self.rows[encode(config, &self.latent_arities)].as_deref()
    }
}

/// Per-latent conditionals `p(z_j | x)`, indexed `[j][z_j * |X| + x]`.
fn latent_conditionals(joint: &DiscreteJoint, p_x: &[f64]) -> Vec<Vec<f64>> {
    let m = joint.num_latents();
    let nx = joint.target_arity();
    (0..m)
        .map(|j| {
            let mut pair = joint.marginal(&[j, m]);
            for (slot, v) in pair.iter_mut().enumerate() {
                let px = p_x[slot % nx];
                *v = if px > 0.0 { *v / px } else { 0.0 };
            }
            pair
        })
        .collect()
}

/// Decoder that pretends the encoding is conditionally independent given `x`:
/// `p_CI(x | z) = p(x) prod_j p(z_j | x) / p_CI(z)`.
pub fn ci_decoder_distribution(joint: &DiscreteJoint) -> Result<CiDecoderTable> {
    let m = joint.num_latents();
    let nx = joint.target_arity();
    let latent_arities = joint.arities[..m].to_vec();
    let p_x = joint.marginal(&[m]);
    let cond = latent_conditionals(joint, &p_x);
    let latents: Vec<usize> = (0..m).collect();
    let p_z = joint.marginal(&latents);
    let mut config = vec![0; m];
    let mut rows = Vec::with_capacity(p_z.len());
    for (index, &pz) in p_z.iter().enumerate() {
        decode(index, &latent_arities, &mut config);
        let unnormalized: Vec<f64> = (0..nx)
            .map(|x| {
                config
                    .iter()
                    .enumerate()
                    .fold(p_x[x], |acc, (j, &zj)| acc * cond[j][zj * nx + x])
            })
            .collect();
        let evidence: f64 = unnormalized.iter().sum();
        if evidence > 0.0 {
            rows.push(Some(
                unnormalized.into_iter().map(|v| v / evidence).collect(),
            ));
        } else if pz > 0.0 {
            return Err(Error::AbsoluteContinuity {
                config: config.clone(),
            });
        } else {
            rows.push(None);
        }
    }
    Ok(CiDecoderTable {
        latent_arities,
        target_arity: nx,
        rows,
    })
}

/// CI synergy `sum_z p(z) KL(p(x|z) || p_CI(x|z))`.
pub fn discrete_ci_synergy(joint: &DiscreteJoint) -> Result<f64> {
    let table = ci_decoder_distribution(joint)?;
    let nx = table.target_arity;
    let mut total = 0.0;
    for (zi, row) in table.rows.iter().enumerate() {
        let Some(ci) = row else { continue };
        let block = &joint.probs[zi * nx..(zi + 1) * nx];
        let pz: f64 = block.iter().sum();
        if pz == 0.0 {
            continue;
        }
        for (x, &pzx) in block.iter().enumerate() {
            if pzx > 0.0 {
                total += pzx * ((pzx / pz) / ci[x]).ln();
            }
        }
    }
    Ok(total.max(0.0))
}

/// Whole-minus-sum synergy `I(Z; X) - sum_j I(Z_j; X)`. Negative under redundancy.
pub fn discrete_wms_synergy(joint: &DiscreteJoint) -> Result<f64> {
    let m = joint.num_latents();
    let latents: Vec<usize> = (0..m).collect();
    let whole = mutual_information(joint, &latents)?;
    let mut parts = 0.0;
    for j in 0..m {
        parts += mutual_information(joint, &[j])?;
    }
    Ok(whole - parts)
}
