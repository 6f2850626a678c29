use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ltnt::LatentStack;
use super::pca::first_principal_component;
use super::ComplexityError;
use crate::retrieval::cosine;
use crate::types::Level;

const CLASSES: [Level; 2] = [Level::Level0, Level::Level1];

/// Inclusive range of layers used for fitting and classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LayerRange {
    pub first: usize,
    pub last: Option<usize>,
}

impl LayerRange {
    fn resolve(&self, layers: usize) -> Result<(usize, usize), ComplexityError> {
        let last = self.last.unwrap_or(layers - 1);
        if self.first > last || last >= layers {
            return Err(ComplexityError::InvalidStack(format!(
                "layer range {}..={last} outside 0..{layers}",
                self.first
            )));
        }
        Ok((self.first, last - self.first + 1))
    }
}

/// Per-class, per-layer unit prototype directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrototypeSet {
    classes: Vec<u8>,
    layers: usize,
    hidden: usize,
    #[serde(skip_serializing_if = "is_zero")]
    first_layer: usize,
    /// `u[class][layer]`, unit length.
    u: Vec<Vec<Vec<f64>>>,
    /// Centering means, kept for diagnostics.
    means: Vec<Vec<Vec<f64>>>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

#[derive(Deserialize)]
struct RawPrototypeSet {
    classes: Vec<u8>,
    layers: usize,
    hidden: usize,
    #[serde(default)]
    first_layer: usize,
    u: Vec<Vec<Vec<f64>>>,
    means: Vec<Vec<Vec<f64>>>,
}

impl PrototypeSet {
    fn validate(self) -> Result<Self, ComplexityError> {
        if self.classes != [0, 1] {
            return Err(ComplexityError::Corrupt(format!("classes must be [0, 1], got {:?}", self.classes)));
        }
        for table in [&self.u, &self.means] {
            if table.len() != self.classes.len()
                || table.iter().any(|per_layer| {
                    per_layer.len() != self.layers || per_layer.iter().any(|v| v.len() != self.hidden)
                })
            {
                return Err(ComplexityError::Corrupt("prototype table shape disagrees with header".into()));
            }
        }
        for per_layer in &self.u {
            for v in per_layer {
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (n - 1.0).abs() > 1e-9 {
                    return Err(ComplexityError::Corrupt(format!("prototype norm {n} is not 1")));
                }
            }
        }
        Ok(self)
    }

    pub fn layers(&self) -> usize {
        self.layers
    }
    pub fn hidden(&self) -> usize {
        self.hidden
    }
    pub fn first_layer(&self) -> usize {
        self.first_layer
    }
    pub fn prototype(&self, level: Level, layer: usize) -> &[f64] {
        &self.u[level.as_u8() as usize][layer]
    }
    pub fn mean(&self, level: Level, layer: usize) -> &[f64] {
        &self.means[level.as_u8() as usize][layer]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("prototypes serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ComplexityError> {
        let raw: RawPrototypeSet = serde_json::from_str(text)?;
        PrototypeSet {
            classes: raw.classes,
            layers: raw.layers,
            hidden: raw.hidden,
            first_layer: raw.first_layer,
            u: raw.u,
            means: raw.means,
        }
        .validate()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ComplexityError> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ComplexityError> {
        let raw: RawPrototypeSet = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        PrototypeSet {
            classes: raw.classes,
            layers: raw.layers,
            hidden: raw.hidden,
            first_layer: raw.first_layer,
            u: raw.u,
            means: raw.means,
        }
        .validate()
    }
}

/// Fits one prototype per (class, layer): the first principal component of
/// that class's layer rows. Stacks without a label are ignored.
pub fn fit_prototypes(
    latents: &[LatentStack],
    labels: &HashMap<String, Level>,
    range: LayerRange,
) -> Result<PrototypeSet, ComplexityError> {
    let first = latents.first().ok_or(ComplexityError::ClassTooSmall(0))?;
    let shape = (first.layers(), first.hidden());
    if let Some(bad) = latents.iter().find(|s| (s.layers(), s.hidden()) != shape) {
        return Err(ComplexityError::ShapeMismatch {
            expected: shape,
            got: (bad.layers(), bad.hidden()),
        });
    }
    let (offset, layers) = range.resolve(shape.0)?;

    let mut by_class: Vec<Vec<&LatentStack>> = vec![Vec::new(); CLASSES.len()];
    for s in latents {
        match labels.get(s.claim_id()) {
            Some(level) => by_class[level.as_u8() as usize].push(s),
            None => log::debug!("no level for {}, skipping", s.claim_id()),
        }
    }
    for (k, members) in by_class.iter().enumerate() {
        if members.len() < 2 {
            return Err(ComplexityError::ClassTooSmall(k as u8));
        }
    }

    let cells: Vec<(usize, usize)> = (0..CLASSES.len())
        .flat_map(|k| (0..layers).map(move |l| (k, l)))
        .collect();
    let fitted = cells
        .par_iter()
        .map(|&(k, l)| {
            let rows: Vec<&[f64]> = by_class[k].iter().map(|s| s.layer(offset + l)).collect();
            first_principal_component(&rows)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut u = vec![Vec::with_capacity(layers); CLASSES.len()];
    let mut means = vec![Vec::with_capacity(layers); CLASSES.len()];
    for ((k, _), comp) in cells.into_iter().zip(fitted) {
        u[k].push(comp.direction);
        means[k].push(comp.mean);
    }
    Ok(PrototypeSet {
        classes: CLASSES.iter().map(|c| c.as_u8()).collect(),
        layers,
        hidden: shape.1,
        first_layer: offset,
        u,
        means,
    })
}

/// Result of classifying one stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub claim_id: String,
    pub level: Level,
    /// Winning class per layer.
    pub votes: Vec<u8>,
    /// `sims[layer][class]`, cosine to each prototype.
    pub sims: Vec<Vec<f64>>,
}

/// Index of the largest value; ties go to the highest index (level 1).
fn argmax_prefer_high(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v >= values[best] {
            best = i;
        }
    }
    best
}

/// Majority over per-layer votes; ties go to the highest class.
pub fn majority_level(votes: &[u8]) -> Level {
    let mut counts = [0usize; 2];
    for &v in votes {
        counts[v as usize] += 1;
    }
    if counts[0] > counts[1] {
        Level::Level0
    } else {
        Level::Level1
    }
}

/// Cosine-matches each layer of `latent` against the class prototypes,
/// votes per layer, and takes the layer majority.
pub fn classify(latent: &LatentStack, protos: &PrototypeSet) -> Result<Classification, ComplexityError> {
    if latent.hidden() != protos.hidden || latent.layers() < protos.first_layer + protos.layers {
        return Err(ComplexityError::ShapeMismatch {
            expected: (protos.first_layer + protos.layers, protos.hidden),
            got: (latent.layers(), latent.hidden()),
        });
    }
    let mut votes = Vec::with_capacity(protos.layers);
    let mut sims = Vec::with_capacity(protos.layers);
    for l in 0..protos.layers {
        let c = latent.layer(protos.first_layer + l);
        let s: Vec<f64> = protos.u.iter().map(|per_layer| cosine(c, &per_layer[l])).collect();
        votes.push(argmax_prefer_high(&s) as u8);
        sims.push(s);
    }
    Ok(Classification {
        claim_id: latent.claim_id().to_string(),
        level: majority_level(&votes),
        votes,
        sims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Class 0 varies along e1 and class 1 along e2, at every layer.
    fn separable(rng: &mut ChaCha8Rng, per_class: usize, layers: usize, h: usize) -> (Vec<LatentStack>, HashMap<String, Level>) {
        let mut stacks = Vec::new();
        let mut labels = HashMap::new();
        for (k, level) in CLASSES.iter().enumerate() {
            for i in 0..per_class {
                let rows: Vec<Vec<f64>> = (0..layers)
                    .map(|_| {
                        let mut r: Vec<f64> = (0..h).map(|_| rng.gen_range(-0.05..0.05)).collect();
                        r[k] = rng.gen_range(1.0..3.0);
                        r
                    })
                    .collect();
                let id = format!("k{k}-{i}");
                stacks.push(LatentStack::from_rows(&id, &rows).unwrap());
                labels.insert(id, *level);
            }
        }
        (stacks, labels)
    }

    #[test]
    fn shape_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (stacks, labels) = separable(&mut rng, 10, 4, 8);
        let p = fit_prototypes(&stacks, &labels, LayerRange::default()).unwrap();
        assert_eq!((p.layers(), p.hidden()), (4, 8));
        for level in CLASSES {
            for l in 0..4 {
                let n: f64 = p.prototype(level, l).iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn separable_prototypes_align_with_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (stacks, labels) = separable(&mut rng, 10, 4, 8);
        let p = fit_prototypes(&stacks, &labels, LayerRange::default()).unwrap();
        let axis = |k: usize| -> Vec<f64> { (0..8).map(|i| f64::from(u8::from(i == k))).collect() };
        for l in 0..4 {
            assert!(cosine(p.prototype(Level::Level0, l), &axis(0)) > 0.99);
            assert!(cosine(p.prototype(Level::Level1, l), &axis(1)) > 0.99);
        }
        // a class-1 axis direction votes level 1 at every layer
        let probe = LatentStack::from_rows("t", &vec![axis(1); 4]).unwrap();
        let c = classify(&probe, &p).unwrap();
        assert_eq!(c.level, Level::Level1);
        assert_eq!(c.votes, [1, 1, 1, 1]);
    }

    #[test]
    fn orthogonal_probe_ties_to_level1() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (stacks, labels) = separable(&mut rng, 10, 2, 3);
        let p = fit_prototypes(&stacks, &labels, LayerRange::default()).unwrap();
        let zero = LatentStack::from_rows("z", &[vec![0.0; 3], vec![0.0; 3]]).unwrap();
        let c = classify(&zero, &p).unwrap();
        assert_eq!(c.votes, [1, 1]);
        assert_eq!(c.level, Level::Level1);
    }

    #[test]
    fn layer_majority() {
        assert_eq!(majority_level(&[0, 0, 1]), Level::Level0);
        assert_eq!(majority_level(&[0, 1]), Level::Level1);
        assert_eq!(majority_level(&[1, 1, 0]), Level::Level1);
        assert_eq!(argmax_prefer_high(&[0.3, 0.3]), 1);
        assert_eq!(argmax_prefer_high(&[0.4, 0.3]), 0);
    }

    #[test]
    fn fit_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (stacks, mut labels) = separable(&mut rng, 2, 2, 3);
        labels.remove("k1-1");
        assert!(matches!(
            fit_prototypes(&stacks, &labels, LayerRange::default()),
            Err(ComplexityError::ClassTooSmall(1))
        ));
        let (mut stacks, labels) = separable(&mut rng, 3, 2, 3);
        stacks.push(LatentStack::new("odd", 1, 3, vec![1.0; 3]).unwrap());
        assert!(matches!(
            fit_prototypes(&stacks, &labels, LayerRange::default()),
            Err(ComplexityError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn layer_range_restricts_fit_and_classify() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (stacks, labels) = separable(&mut rng, 6, 5, 4);
        let range = LayerRange { first: 1, last: Some(3) };
        let p = fit_prototypes(&stacks, &labels, range).unwrap();
        assert_eq!((p.first_layer(), p.layers()), (1, 3));
        let c = classify(&stacks[0], &p).unwrap();
        assert_eq!(c.votes.len(), 3);
        assert!(fit_prototypes(&stacks, &labels, LayerRange { first: 3, last: Some(9) }).is_err());
        let short = LatentStack::new("s", 3, 4, vec![1.0; 12]).unwrap();
        assert!(classify(&short, &p).is_err());
    }

    #[test]
    fn persisted_prototypes_classify_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (stacks, labels) = separable(&mut rng, 8, 3, 5);
        let p = fit_prototypes(&stacks, &labels, LayerRange::default()).unwrap();
        let back = PrototypeSet::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        for s in &stacks {
            assert_eq!(classify(s, &p).unwrap(), classify(s, &back).unwrap());
        }
        let json: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(json["classes"], serde_json::json!([0, 1]));
        assert_eq!(json["layers"], 3);
        assert!(PrototypeSet::from_json(&p.to_json().replace("\"hidden\":5", "\"hidden\":4")).is_err());
    }
}
