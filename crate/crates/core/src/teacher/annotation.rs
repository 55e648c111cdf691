use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point;
use crate::teacher::preprocess::{preprocess_sentence, preprocess_token};
use crate::teacher::vocab::Vocabulary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// Half-open box `[min, max)`.
    Rect { min: [f64; 2], max: [f64; 2] },
    /// Explicit cells `[i, j]` of a grid frame.
    Cells {
        resolution: f64,
        origin: [f64; 2],
        cells: Vec<[usize; 2]>,
    },
}

impl Shape {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Shape::Rect { min, max } => {
                p.x >= min[0] && p.x < max[0] && p.y >= min[1] && p.y < max[1]
            }
            Shape::Cells {
                resolution,
                origin,
                cells,
            } => {
                let fi = ((p.x - origin[0]) / resolution + 1e-9).floor();
                let fj = ((p.y - origin[1]) / resolution + 1e-9).floor();
                if fi < 0.0 || fj < 0.0 {
                    return false;
                }
                cells.binary_search(&[fi as usize, fj as usize]).is_ok()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    /// Place word given in single-word mode.
    pub word: String,
    pub shape: Shape,
    /// Sentences given in sentence mode.
    pub utterances: Vec<String>,
}

/// Ground-truth place layout. A region's index doubles as its true label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAnnotation")]
pub struct Annotation {
    regions: Vec<Region>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnotation {
    regions: Vec<Region>,
}

impl TryFrom<RawAnnotation> for Annotation {
    type Error = Error;

    fn try_from(raw: RawAnnotation) -> Result<Self> {
        Annotation::new(raw.regions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerMode {
    SingleWord,
    Sentence,
}

impl Annotation {
    pub fn new(mut regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Config("annotation has no regions".into()));
        }
        for r in &mut regions {
            if r.word.trim().is_empty() {
                return Err(Error::Config("region with an empty word".into()));
            }
            if r.utterances.is_empty() {
                return Err(Error::Config(format!(
                    "region '{}' has no utterances",
                    r.word
                )));
            }
            match &mut r.shape {
                Shape::Rect { min, max } => {
                    if !(min[0] < max[0] && min[1] < max[1]) {
                        return Err(Error::Config(format!(
                            "region '{}' has an empty box",
                            r.word
                        )));
                    }
                }
                Shape::Cells {
                    resolution, cells, ..
                } => {
                    if !(*resolution > 0.0) {
                        return Err(Error::Config("cell region resolution must be > 0".into()));
                    }
                    cells.sort_unstable();
                    cells.dedup();
                }
            }
        }
        Ok(Self { regions })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// First region containing `p`.
    pub fn region_of(&self, p: &Point) -> Option<usize> {
        self.regions.iter().position(|r| r.shape.contains(p))
    }

    pub fn regions_containing(&self, p: &Point) -> Vec<usize> {
        (0..self.regions.len())
            .filter(|&i| self.regions[i].shape.contains(p))
            .collect()
    }

    pub fn label_of(&self, p: &Point) -> Result<usize> {
        self.region_of(p)
            .ok_or(Error::AnnotationGap { x: p.x, y: p.y })
    }

    /// Every token the scripted teacher can produce, in first-seen order.
    pub fn inventory(&self, mode: AnswerMode) -> Vocabulary {
        let mut vocab = Vocabulary::new();
        for r in &self.regions {
            match mode {
                AnswerMode::SingleWord => {
                    vocab.extend(preprocess_token(&r.word));
                }
                AnswerMode::Sentence => {
                    for u in &r.utterances {
                        vocab.extend(preprocess_sentence(u));
                    }
                }
            }
        }
        vocab
    }
}
