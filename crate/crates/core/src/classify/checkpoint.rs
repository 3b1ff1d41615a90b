//! Text checkpoints:
//!
//! ```text
//! classifier shared-mlp
//! dim 50
//! hidden 200
//! slope 1.0000000000000000e-2
//! block ws 200 50
//! <200 rows of 50 values>
//! block bs 1 200
//! …
//! ```
//!
//! The cosine model writes `threshold 0.5` in place of `slope`.

use std::io::{BufRead, Write};
use std::path::Path;

use super::{Arch, Block, Classifier, MlpModel, PairClassifier, SharedCosineModel, SharedMlpModel};
use crate::{Error, Result};

impl Classifier {
    fn blocks(&self) -> Vec<Block> {
        let (d, h) = (self.dim(), self.hidden());
        match self.arch() {
            Arch::Mlp => MlpModel::blocks(d, h).to_vec(),
            Arch::SharedMlp => SharedMlpModel::blocks(d, h).to_vec(),
            Arch::SharedCosine => SharedCosineModel::blocks(d, h).to_vec(),
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "classifier {}", self.arch())?;
        writeln!(out, "dim {}", self.dim())?;
        writeln!(out, "hidden {}", self.hidden())?;
        match self {
            Classifier::Mlp(m) => writeln!(out, "slope {:.16e}", m.slope())?,
            Classifier::SharedMlp(m) => writeln!(out, "slope {:.16e}", m.slope())?,
            Classifier::SharedCosine(m) => writeln!(out, "threshold {}", m.threshold())?,
        }
        let mut params = self.params();
        for b in self.blocks() {
            writeln!(out, "block {} {} {}", b.name, b.rows, b.cols)?;
            let (values, rest) = params.split_at(b.len());
            params = rest;
            for row in values.chunks(b.cols) {
                let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate().map(|(i, l)| l.map(|l| (i + 1, l)));
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some(r) => Ok(r?),
                None => Err(Error::parse(
                    0,
                    format!("unexpected end of checkpoint, expected {what}"),
                )),
            }
        };
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (n, line) = next(key)?;
            match line.split_once(' ') {
                Some((k, v)) if k == key => Ok((n, v.trim().to_string())),
                _ => Err(Error::parse(n, format!("expected `{key} <value>`, found {line:?}"))),
            }
        };
        let (n, arch) = field("classifier")?;
        let arch: Arch = arch.parse().map_err(|e: Error| Error::parse(n, e.to_string()))?;
        let (n, dim) = field("dim")?;
        let dim: usize = dim.parse().map_err(|_| Error::parse(n, "bad dim"))?;
        let (n, hidden) = field("hidden")?;
        let hidden: usize = hidden.parse().map_err(|_| Error::parse(n, "bad hidden size"))?;
        let (n, extra) = field(if arch == Arch::SharedCosine {
            "threshold"
        } else {
            "slope"
        })?;
        let extra: f64 = extra.parse().map_err(|_| Error::parse(n, "bad number"))?;
        if arch == Arch::SharedCosine && extra != SharedCosineModel::THRESHOLD {
            return Err(Error::parse(n, format!("threshold must be 0.5, got {extra}")));
        }

        let blocks = match arch {
            Arch::Mlp => MlpModel::blocks(dim, hidden).to_vec(),
            Arch::SharedMlp => SharedMlpModel::blocks(dim, hidden).to_vec(),
            Arch::SharedCosine => SharedCosineModel::blocks(dim, hidden).to_vec(),
        };
        let mut theta = Vec::with_capacity(blocks.iter().map(Block::len).sum());
        for b in &blocks {
            let (n, header) = next("block header")?;
            let expected = format!("block {} {} {}", b.name, b.rows, b.cols);
            if header.trim() != expected {
                return Err(Error::parse(n, format!("expected {expected:?}, found {header:?}")));
            }
            for _ in 0..b.rows {
                let (n, row) = next("matrix row")?;
                let before = theta.len();
                for f in row.split_whitespace() {
                    theta.push(
                        f.parse::<f64>()
                            .map_err(|_| Error::parse(n, format!("bad value {f:?}")))?,
                    );
                }
                if theta.len() - before != b.cols {
                    return Err(Error::parse(n, format!("expected {} values", b.cols)));
                }
            }
        }
        let model = match arch {
            Arch::Mlp => Classifier::Mlp(MlpModel::from_params(dim, hidden, extra, theta)?),
            Arch::SharedMlp => Classifier::SharedMlp(SharedMlpModel::from_params(dim, hidden, extra, theta)?),
            Arch::SharedCosine => Classifier::SharedCosine(SharedCosineModel::from_params(dim, hidden, theta)?),
        };
        if !model.is_finite() {
            return Err(Error::Config("checkpoint holds non-finite parameters".into()));
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }
}
