//! Token embeddings and a recurrent sequence encoder for terms and goals.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{init_tensor, Dense, GruCell, NodeId, ParamId, ParamSet, RmsProp, Tape};
use crate::kernel::{Goal, Term};

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";
/// Prefix token marking a library theorem (as opposed to a goal).
pub const THEOREM: &str = "<thm>";

const RESERVED: [&str; 5] = [PAD, UNK, BOS, EOS, THEOREM];
const OPERATORS: [&str; 7] = ["~", "/\\", "\\/", "==>", "<=>", "T", "F"];

pub const DEFAULT_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    tokens: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    /// Reserved tokens, connectives and constants, then `variables` sorted.
    pub fn new<S: AsRef<str>>(variables: impl IntoIterator<Item = S>) -> Vocabulary {
        let mut vars: Vec<String> = variables.into_iter().map(|s| s.as_ref().to_string()).collect();
        vars.sort();
        vars.dedup();
        let tokens = RESERVED
            .iter()
            .chain(OPERATORS.iter())
            .map(|s| s.to_string())
            .chain(vars.into_iter().filter(|v| !RESERVED.contains(&v.as_str()) && !OPERATORS.contains(&v.as_str())))
            .collect();
        Vocabulary::from_tokens(tokens)
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Vocabulary {
        let mut vars = Vec::new();
        for t in terms {
            vars.extend(t.free_vars());
        }
        Vocabulary::new(vars)
    }

    fn from_tokens(tokens: Vec<String>) -> Vocabulary {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { tokens, index }
    }

    /// Rebuilds the lookup table after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(1)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn ids<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }
}

/// Chained-implication Polish tokens for a goal.
pub fn goal_tokens(goal: &Goal) -> Vec<String> {
    goal.to_implication().tokenize_polish()
}

/// Tokens for a library theorem used as a tactic argument.
pub fn theorem_tokens(statement: &Term) -> Vec<String> {
    let mut out = vec![THEOREM.to_string()];
    out.extend(statement.tokenize_polish());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub vocab: Vocabulary,
    pub embedding: ParamId,
    pub cell: GruCell,
    pub embed_dim: usize,
    pub dim: usize,
}

impl Encoder {
    pub fn new(params: &mut ParamSet, vocab: Vocabulary, embed_dim: usize, dim: usize, rng: &mut impl Rng) -> Encoder {
        let embedding = params.add("encoder.embedding", init_tensor(vocab.len(), embed_dim, 0.5, rng));
        let cell = GruCell::new(params, "encoder.gru", embed_dim, dim, rng);
        Encoder {
            vocab,
            embedding,
            cell,
            embed_dim,
            dim,
        }
    }

    /// Final recurrent state over the embedded token ids.
    pub fn encode_ids(&self, tape: &mut Tape<'_>, ids: &[usize]) -> NodeId {
        assert!(!ids.is_empty(), "cannot encode an empty token list");
        let inputs: Vec<NodeId> = ids.iter().map(|id| tape.row(self.embedding, *id)).collect();
        let h0 = tape.input(vec![0.0; self.dim]);
        self.cell.run(tape, &inputs, h0)
    }

    pub fn encode<S: AsRef<str>>(&self, tape: &mut Tape<'_>, tokens: &[S]) -> NodeId {
        let ids = self.vocab.ids(tokens);
        self.encode_ids(tape, &ids)
    }

    pub fn encode_goal(&self, tape: &mut Tape<'_>, goal: &Goal) -> NodeId {
        self.encode(tape, &goal_tokens(goal))
    }

    pub fn encode_theorem(&self, tape: &mut Tape<'_>, statement: &Term) -> NodeId {
        self.encode(tape, &theorem_tokens(statement))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainReport {
    /// Mean per-token cross-entropy before each epoch's update.
    pub losses: Vec<f64>,
    /// Teacher-forced token accuracy after the last update.
    pub accuracy: f64,
}

/// Decoder paired with the encoder during reconstruction warm-up.
struct Decoder {
    cell: GruCell,
    out: Dense,
}

fn reconstruction_loss(
    tape: &mut Tape<'_>,
    encoder: &Encoder,
    decoder: &Decoder,
    sequences: &[Vec<usize>],
) -> (NodeId, usize, usize) {
    let bos = encoder.vocab.id(BOS);
    let eos = encoder.vocab.id(EOS);
    let mut picks = Vec::new();
    let mut correct = 0;
    for ids in sequences {
        let mut h = encoder.encode_ids(tape, ids);
        let mut prev = bos;
        for &target in ids.iter().chain(std::iter::once(&eos)) {
            let x = tape.row(encoder.embedding, prev);
            h = decoder.cell.step(tape, x, h);
            let logits = decoder.out.forward(tape, h);
            let values = tape.value(logits);
            let argmax = (0..values.len()).fold(0, |best, k| if values[k] > values[best] { k } else { best });
            if argmax == target {
                correct += 1;
            }
            picks.push(tape.log_softmax_pick(logits, target, None));
            prev = target;
        }
    }
    let total = picks.len();
    let sum = tape.sum(&picks);
    (tape.scale(sum, -1.0 / total as f64), correct, total)
}

/// Sequence-autoencoding warm-up of the encoder parameters in `params`.
///
/// A decoder is trained alongside on a scratch copy; only the encoder's
/// tensors are written back.
pub fn pretrain_reconstruction(
    params: &mut ParamSet,
    encoder: &Encoder,
    corpus: &[Term],
    epochs: usize,
    learning_rate: f64,
    rng: &mut impl Rng,
) -> PretrainReport {
    assert!(!corpus.is_empty(), "reconstruction corpus is empty");
    let sequences: Vec<Vec<usize>> = corpus.iter().map(|t| encoder.vocab.ids(&t.tokenize_polish())).collect();
    let shared = params.len();
    let mut work = params.clone();
    let decoder = Decoder {
        cell: GruCell::new(&mut work, "decoder.gru", encoder.embed_dim, encoder.dim, rng),
        out: Dense::new(&mut work, "decoder.out", encoder.dim, encoder.vocab.len(), rng),
    };
    let mut opt = RmsProp::new(&work, learning_rate);
    let mut losses = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let grads = {
            let mut tape = Tape::new(&work);
            let (loss, _, _) = reconstruction_loss(&mut tape, encoder, &decoder, &sequences);
            losses.push(tape.scalar(loss));
            tape.backward(&[(loss, 1.0)])
        };
        opt.step(&mut work, &grads);
    }
    let accuracy = {
        let mut tape = Tape::new(&work);
        let (_, correct, total) = reconstruction_loss(&mut tape, encoder, &decoder, &sequences);
        correct as f64 / total as f64
    };
    for id in work.ids().take(shared) {
        *params.get_mut(id) = work.get(id).clone();
    }
    PretrainReport { losses, accuracy }
}
