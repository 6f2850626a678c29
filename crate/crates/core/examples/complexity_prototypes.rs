// Latent-space complexity classifier: one principal-component prototype per
// (level, layer), cosine vote per layer, majority over layers. Latents
// travel between tools as LTNT files.
//
//     cargo run --example complexity_prototypes

use std::collections::HashMap;
use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttsfc::complexity::{
    classify, first_principal_component, fit_prototypes, load_latents, save_latents, LatentStack, LayerRange,
};
use ttsfc::Level;

const LAYERS: usize = 6;
const HIDDEN: usize = 16;

/// Easy claims lean on the first half of the hidden axes, hard ones on the
/// second half.
fn synthetic(rng: &mut ChaCha8Rng, id: String, level: Level) -> Result<LatentStack, Box<dyn Error>> {
    let offset = if level == Level::Level0 { 0 } else { HIDDEN / 2 };
    let mut data = vec![0.0; LAYERS * HIDDEN];
    for l in 0..LAYERS {
        let strength = rng.gen_range(0.5..2.0);
        for j in 0..HIDDEN {
            data[l * HIDDEN + j] = rng.gen_range(-0.2..0.2);
        }
        data[l * HIDDEN + offset + l % (HIDDEN / 2)] += strength;
    }
    Ok(LatentStack::new(id, LAYERS, HIDDEN, data)?)
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let rows = [vec![2.0, 1.0], vec![4.0, 2.1], vec![6.0, 2.9]];
    let pc = first_principal_component(&rows)?;
    println!("toy PCA: direction {:.3?}, variance {:.3}", pc.direction, pc.variance);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut stacks = Vec::new();
    let mut labels = HashMap::new();
    for i in 0..40 {
        let level = if i % 2 == 0 { Level::Level0 } else { Level::Level1 };
        let id = format!("claim-{i}");
        stacks.push(synthetic(&mut rng, id.clone(), level)?);
        labels.insert(id, level);
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("latents.ltnt");
    save_latents(&path, &stacks)?;
    let stacks = load_latents(&path)?;

    let protos = fit_prototypes(&stacks, &labels, LayerRange { first: 1, last: None })?;
    println!("prototypes: {} layers x {} dims", protos.layers(), protos.hidden());

    let probe = synthetic(&mut rng, "new-claim".into(), Level::Level1)?;
    let c = classify(&probe, &protos)?;
    println!("{} -> level {} (layer votes {:?})", c.claim_id, c.level.as_u8(), c.votes);

    let correct = stacks.iter().filter(|s| classify(s, &protos).map(|c| c.level == labels[s.claim_id()]).unwrap_or(false)).count();
    println!("training accuracy {correct}/{}", stacks.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
