//! Versioned, self-describing text serialization of a trained model.
//!
//! Layout: a magic+version line, the configuration as key/value lines, the
//! scalers, then per-layer dimension lines followed by row-major weight and
//! bias arrays. Floats are written in Rust's shortest round-trip form, so a
//! save/load cycle reproduces every value bit for bit. Optimiser state is
//! not persisted; a loaded model is evaluation-ready.

use super::{Activation, AdamState, DenseLayer, Loss, MlpConfig, MlpModel, NnError};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const MAGIC: &str = "tradekit-mlp";
const VERSION: u32 = 1;

pub fn save_model(model: &MlpModel) -> Vec<u8> {
    let c = &model.config;
    let mut out = String::new();
    out.push_str(&format!("{MAGIC} {VERSION}\n"));
    out.push_str(&format!("input_size {}\n", c.input_size));
    let hidden: Vec<String> = c.hidden_sizes.iter().map(|h| h.to_string()).collect();
    out.push_str(&format!("hidden_sizes {}\n", hidden.join(",")));
    out.push_str(&format!("output_size {}\n", c.output_size));
    out.push_str(&format!("dropout_rate {}\n", c.dropout_rate));
    out.push_str(&format!("learning_rate {}\n", c.learning_rate));
    out.push_str(&format!("adam_beta1 {}\n", c.adam_beta1));
    out.push_str(&format!("adam_beta2 {}\n", c.adam_beta2));
    out.push_str(&format!("adam_epsilon {}\n", c.adam_epsilon));
    out.push_str(&format!("batch_size {}\n", c.batch_size));
    out.push_str(&format!("max_epochs {}\n", c.max_epochs));
    out.push_str(&format!("patience {}\n", c.patience));
    out.push_str(&format!("seed {}\n", c.seed));
    let scaler: Vec<String> = model
        .input_scaler
        .iter()
        .map(|(lo, hi)| format!("{lo},{hi}"))
        .collect();
    out.push_str(&format!("input_scaler {}\n", scaler.join(";")));
    out.push_str(&format!(
        "target_scaler {},{}\n",
        model.target_scaler.0, model.target_scaler.1
    ));
    out.push_str(&format!("layers {}\n", model.layers.len()));
    for (i, layer) in model.layers.iter().enumerate() {
        out.push_str(&format!("layer {i} {} {}\n", layer.in_dim, layer.out_dim));
        let w: Vec<String> = layer.weights.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("weights {}\n", w.join(" ")));
        let b: Vec<String> = layer.biases.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("biases {}\n", b.join(" ")));
    }
    out.push_str("end\n");
    out.into_bytes()
}

struct LineReader<'a> {
    lines: std::str::Lines<'a>,
}

impl<'a> LineReader<'a> {
    fn next(&mut self) -> Result<&'a str, NnError> {
        self.lines
            .next()
            .ok_or_else(|| NnError::CorruptPayload("unexpected end of payload".into()))
    }

    /// Next line, which must start with `key `; returns the remainder.
    fn field(&mut self, key: &str) -> Result<&'a str, NnError> {
        let line = self.next()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| NnError::CorruptPayload(format!("expected `{key}` line, got `{line}`")))
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, NnError> {
    s.trim()
        .parse::<T>()
        .map_err(|_| NnError::CorruptPayload(format!("unparseable {what}: `{s}`")))
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), NnError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| NnError::CorruptPayload(format!("expected `lo,hi` for {what}")))?;
    Ok((parse_num(a, what)?, parse_num(b, what)?))
}

fn parse_array(s: &str, expected: usize, what: &str) -> Result<Vec<f64>, NnError> {
    let values: Result<Vec<f64>, _> = s.split_whitespace().map(|v| parse_num(v, what)).collect();
    let values = values?;
    if values.len() != expected {
        return Err(NnError::CorruptPayload(format!(
            "{what}: expected {expected} values, found {}",
            values.len()
        )));
    }
    Ok(values)
}

pub fn load_model(bytes: &[u8]) -> Result<MlpModel, NnError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| NnError::CorruptPayload("payload is not UTF-8".into()))?;
    let mut r = LineReader { lines: text.lines() };

    let header = r.next()?;
    let (magic, version) = header
        .split_once(' ')
        .ok_or_else(|| NnError::CorruptPayload("missing format header".into()))?;
    if magic != MAGIC {
        return Err(NnError::CorruptPayload(format!("unknown magic `{magic}`")));
    }
    if parse_num::<u32>(version, "format version")? != VERSION {
        return Err(NnError::UnsupportedVersion(version.to_string()));
    }

    let input_size = parse_num(r.field("input_size")?, "input_size")?;
    let hidden_raw = r.field("hidden_sizes")?;
    let hidden_sizes: Vec<usize> = if hidden_raw.trim().is_empty() {
        Vec::new()
    } else {
        hidden_raw
            .split(',')
            .map(|s| parse_num(s, "hidden size"))
            .collect::<Result<_, _>>()?
    };
    let config = MlpConfig {
        input_size,
        hidden_sizes,
        output_size: parse_num(r.field("output_size")?, "output_size")?,
        dropout_rate: parse_num(r.field("dropout_rate")?, "dropout_rate")?,
        activation: Activation::Relu,
        loss: Loss::Mae,
        learning_rate: parse_num(r.field("learning_rate")?, "learning_rate")?,
        adam_beta1: parse_num(r.field("adam_beta1")?, "adam_beta1")?,
        adam_beta2: parse_num(r.field("adam_beta2")?, "adam_beta2")?,
        adam_epsilon: parse_num(r.field("adam_epsilon")?, "adam_epsilon")?,
        batch_size: parse_num(r.field("batch_size")?, "batch_size")?,
        max_epochs: parse_num(r.field("max_epochs")?, "max_epochs")?,
        patience: parse_num(r.field("patience")?, "patience")?,
        seed: parse_num(r.field("seed")?, "seed")?,
    };

    let input_scaler: Vec<(f64, f64)> = r
        .field("input_scaler")?
        .split(';')
        .map(|s| parse_pair(s, "input_scaler"))
        .collect::<Result<_, _>>()?;
    if input_scaler.len() != config.input_size {
        return Err(NnError::CorruptPayload(
            "input_scaler length does not match input_size".into(),
        ));
    }
    let target_scaler = parse_pair(r.field("target_scaler")?, "target_scaler")?;

    let n_layers: usize = parse_num(r.field("layers")?, "layer count")?;
    if n_layers != config.hidden_sizes.len() + 1 {
        return Err(NnError::CorruptPayload(
            "layer count does not match hidden_sizes".into(),
        ));
    }
    let mut layers = Vec::with_capacity(n_layers);
    let mut expect_in = config.input_size;
    for i in 0..n_layers {
        let dims = r.field("layer")?;
        let parts: Vec<&str> = dims.split_whitespace().collect();
        if parts.len() != 3 || parse_num::<usize>(parts[0], "layer index")? != i {
            return Err(NnError::CorruptPayload(format!("bad layer line `{dims}`")));
        }
        let in_dim: usize = parse_num(parts[1], "layer in_dim")?;
        let out_dim: usize = parse_num(parts[2], "layer out_dim")?;
        if in_dim != expect_in {
            return Err(NnError::CorruptPayload(format!(
                "layer {i} in_dim {in_dim} does not chain from previous layer"
            )));
        }
        let weights = parse_array(r.field("weights")?, in_dim * out_dim, "weights")?;
        let biases = parse_array(r.field("biases")?, out_dim, "biases")?;
        layers.push(DenseLayer {
            in_dim,
            out_dim,
            weights,
            biases,
        });
        expect_in = out_dim;
    }
    if expect_in != config.output_size {
        return Err(NnError::CorruptPayload(
            "final layer does not match output_size".into(),
        ));
    }
    if r.next()? != "end" {
        return Err(NnError::CorruptPayload("missing end marker".into()));
    }

    let adam = AdamState::zeros_like(&layers);
    let rng = ChaCha20Rng::seed_from_u64(config.seed);
    Ok(MlpModel {
        config,
        layers,
        adam,
        input_scaler,
        target_scaler,
        rng,
    })
}
