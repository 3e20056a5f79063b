//! Multiple-modality codes on top of the auto-associative memory.
//!
//! A pattern is stored as the concatenation of several named segments
//! ("modalities"), e.g. a label description followed by a visual code. The
//! memory itself is unaware of the segmentation; completion of one modality
//! from another falls out of ordinary retrieval. Classification cues zero the
//! description, generation cues zero (or seed) the visual segment.

use std::ops::Range;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::bits::BitVector;
use crate::codecs::{delete_bits, sparsify, CodecError, NxhConfig};
use crate::memory::{MemoryError, Retrieval, WillshawMemory};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MultimodalError {
    #[error("duplicate modality {0:?}")]
    DuplicateModality(String),

    #[error("modality {0:?} has zero length")]
    EmptyModality(String),

    #[error("unknown modality {0:?}")]
    UnknownModality(String),

    #[error("modality {modality:?} expects {expected} bits, got {found}")]
    LengthMismatch {
        modality: String,
        expected: usize,
        found: usize,
    },

    #[error("code does not follow the memory's modality schema")]
    SchemaMismatch,

    #[error("retrieval produced no evidence (all potentials zero)")]
    NoEvidence,

    #[error("generation did not reach the acceptance interval within {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        trace: Vec<TraceStep>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty sample")]
    EmptySample,

    #[error(transparent)]
    Memory(#[from] MemoryError),

    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

impl Segment {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Ordered named segments partitioning `[0, total_len)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalitySchema {
    segments: Vec<Segment>,
    total: usize,
}

impl ModalitySchema {
    pub fn new<S, I>(parts: I) -> Result<Self, MultimodalError>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, usize)>,
    {
        let mut segments: Vec<Segment> = Vec::new();
        let mut offset = 0;
        for (name, len) in parts {
            let name = name.into();
            if segments.iter().any(|s| s.name == name) {
                return Err(MultimodalError::DuplicateModality(name));
            }
            if len == 0 {
                return Err(MultimodalError::EmptyModality(name));
            }
            segments.push(Segment { name, offset, len });
            offset += len;
        }
        Ok(Self {
            segments,
            total: offset,
        })
    }

    pub fn total_len(&self) -> usize {
        self.total
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, name: &str) -> Result<&Segment, MultimodalError> {
        self.segments
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| MultimodalError::UnknownModality(name.to_owned()))
    }

    pub fn range(&self, name: &str) -> Result<Range<usize>, MultimodalError> {
        self.segment(name).map(Segment::range)
    }
}

/// A concatenated multi-modal code ("desCode") and its schema.
#[derive(Debug, Clone, PartialEq)]
pub struct DesCode {
    bits: BitVector,
    schema: Arc<ModalitySchema>,
}

impl DesCode {
    pub fn new(schema: Arc<ModalitySchema>, bits: BitVector) -> Result<Self, MultimodalError> {
        if bits.len() != schema.total_len() {
            return Err(MultimodalError::LengthMismatch {
                modality: "*".into(),
                expected: schema.total_len(),
                found: bits.len(),
            });
        }
        Ok(Self { bits, schema })
    }

    /// Builds the schema from the parts, in order, and concatenates them.
    pub fn concat<S: Into<String>>(parts: Vec<(S, BitVector)>) -> Result<Self, MultimodalError> {
        let (names, codes): (Vec<String>, Vec<BitVector>) =
            parts.into_iter().map(|(n, b)| (n.into(), b)).unzip();
        let schema = ModalitySchema::new(names.into_iter().zip(codes.iter().map(BitVector::len)))?;
        Ok(Self {
            bits: BitVector::concat(&codes),
            schema: Arc::new(schema),
        })
    }

    /// Places named parts into an existing schema; missing modalities are zero.
    pub fn assemble<'a, I>(schema: &Arc<ModalitySchema>, parts: I) -> Result<Self, MultimodalError>
    where
        I: IntoIterator<Item = (&'a str, &'a BitVector)>,
    {
        let mut active = Vec::new();
        let mut seen: Vec<&str> = Vec::new();
        for (name, code) in parts {
            let seg = schema.segment(name)?;
            if seen.contains(&name) {
                return Err(MultimodalError::DuplicateModality(name.to_owned()));
            }
            seen.push(name);
            if code.len() != seg.len {
                return Err(MultimodalError::LengthMismatch {
                    modality: name.to_owned(),
                    expected: seg.len,
                    found: code.len(),
                });
            }
            active.extend(code.iter().map(|p| p + seg.offset));
        }
        let bits = BitVector::from_unsorted(schema.total_len(), active).expect("segments in range");
        Ok(Self {
            bits,
            schema: schema.clone(),
        })
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn into_bits(self) -> BitVector {
        self.bits
    }

    pub fn schema(&self) -> &Arc<ModalitySchema> {
        &self.schema
    }

    pub fn extract(&self, name: &str) -> Result<BitVector, MultimodalError> {
        let range = self.schema.range(name)?;
        Ok(self.bits.slice(range).expect("schema covers the code"))
    }

    /// Copy with the named segment swapped for `code`.
    pub fn replace(&self, name: &str, code: &BitVector) -> Result<Self, MultimodalError> {
        let seg = self.schema.segment(name)?;
        if code.len() != seg.len {
            return Err(MultimodalError::LengthMismatch {
                modality: name.to_owned(),
                expected: seg.len,
                found: code.len(),
            });
        }
        let range = seg.range();
        let mut active: Vec<usize> = self.bits.iter().filter(|p| !range.contains(p)).collect();
        active.extend(code.iter().map(|p| p + seg.offset));
        let bits = BitVector::from_unsorted(self.bits.len(), active).expect("in range");
        Ok(Self {
            bits,
            schema: self.schema.clone(),
        })
    }

    /// Copy with every bit of the named segment cleared.
    pub fn mask(&self, name: &str) -> Result<Self, MultimodalError> {
        let range = self.schema.range(name)?;
        Ok(Self {
            bits: self.bits.retain(|p| !range.contains(&p)),
            schema: self.schema.clone(),
        })
    }
}

/// Parameters of the iterative generation loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationConfig {
    /// Lower bound of the acceptance interval (exclusive).
    pub interval_low: usize,
    /// Upper bound of the acceptance interval (exclusive).
    pub interval_high: usize,
    /// Bits kept by the first sparsification.
    pub initial_sparsity: usize,
    /// Added to the sparsity target after every failed iteration.
    pub sparsity_increment: usize,
    pub max_iters: usize,
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), MultimodalError> {
        if self.interval_low >= self.interval_high {
            return Err(MultimodalError::InvalidConfig(format!(
                "acceptance interval ({}, {}) is empty",
                self.interval_low, self.interval_high
            )));
        }
        if self.max_iters == 0 {
            return Err(MultimodalError::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    pub fn accepts(&self, count: usize) -> bool {
        self.interval_low < count && count < self.interval_high
    }
}

/// One iteration of the generation loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub iteration: usize,
    /// Visual popcount of the memory's response.
    pub after_retrieve: usize,
    /// Visual popcount of the next seed; `None` on the accepting iteration.
    pub after_sparsify: Option<usize>,
    /// Sparsity target in force at this iteration.
    pub sparsity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub code: DesCode,
    pub iterations: usize,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    Label { label: usize, confidence: f64 },
    /// The retrieved description was empty.
    NoEvidence,
}

impl Classification {
    pub fn label(&self) -> Option<usize> {
        match *self {
            Classification::Label { label, .. } => Some(label),
            Classification::NoEvidence => None,
        }
    }
}

/// Acceptance interval plus the visual popcounts it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalEstimate {
    pub low: usize,
    pub high: usize,
    pub counts: Vec<usize>,
}

/// Nearest-rank percentile of sorted counts, `q` in `[0, 100]`.
pub fn percentile(sorted: &[usize], q: f64) -> usize {
    let idx = (q / 100.0 * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// A trained description/visual memory.
#[derive(Debug, Clone)]
pub struct MultiModal<'m> {
    memory: &'m WillshawMemory,
    schema: Arc<ModalitySchema>,
    description: String,
    visual: String,
    nxh: NxhConfig,
}

impl<'m> MultiModal<'m> {
    pub fn new(
        memory: &'m WillshawMemory,
        schema: Arc<ModalitySchema>,
        description: &str,
        visual: &str,
        nxh: NxhConfig,
    ) -> Result<Self, MultimodalError> {
        nxh.validate()?;
        let d = schema.segment(description)?;
        schema.segment(visual)?;
        if d.len != nxh.code_len() {
            return Err(MultimodalError::LengthMismatch {
                modality: description.to_owned(),
                expected: nxh.code_len(),
                found: d.len,
            });
        }
        if memory.input_len() != schema.total_len() || memory.output_len() != schema.total_len() {
            return Err(MultimodalError::LengthMismatch {
                modality: "memory".into(),
                expected: schema.total_len(),
                found: memory.output_len(),
            });
        }
        Ok(Self {
            memory,
            schema,
            description: description.to_owned(),
            visual: visual.to_owned(),
            nxh,
        })
    }

    pub fn schema(&self) -> &Arc<ModalitySchema> {
        &self.schema
    }

    pub fn memory(&self) -> &WillshawMemory {
        self.memory
    }

    /// Description/visual pair in this memory's layout.
    pub fn code(&self, description: &BitVector, visual: &BitVector) -> Result<DesCode, MultimodalError> {
        DesCode::assemble(
            &self.schema,
            [(self.description.as_str(), description), (self.visual.as_str(), visual)],
        )
    }

    pub fn visual_of(&self, code: &DesCode) -> BitVector {
        code.extract(&self.visual).expect("schema checked")
    }

    pub fn description_of(&self, code: &DesCode) -> BitVector {
        code.extract(&self.description).expect("schema checked")
    }

    pub fn without_description(&self, code: &DesCode) -> DesCode {
        code.mask(&self.description).expect("schema checked")
    }

    pub fn retrieve(&self, cue: &DesCode) -> Result<(DesCode, Retrieval), MultimodalError> {
        if **cue.schema() != *self.schema {
            return Err(MultimodalError::SchemaMismatch);
        }
        let r = self.memory.retrieve(cue.bits())?;
        let out = DesCode::new(self.schema.clone(), r.output.clone())?;
        Ok((out, r))
    }

    /// Decodes the description the memory fills in for `cue`.
    pub fn classify(&self, cue: &DesCode) -> Result<Classification, MultimodalError> {
        let (out, _) = self.retrieve(cue)?;
        let decoded = self.nxh.decode(&self.description_of(&out))?;
        Ok(match decoded.confidence() {
            Some(confidence) => Classification::Label {
                label: decoded.label,
                confidence,
            },
            None => Classification::NoEvidence,
        })
    }

    /// The memory's response to a full X-hot description with an empty
    /// visual segment: the union of the features common to the class.
    /// An untrained memory yields an all-zero blob.
    pub fn make_blob(&self, label: usize) -> Result<DesCode, MultimodalError> {
        let x_hot = self.nxh.x_hot_code(label)?;
        let cue = self.code(&x_hot, &BitVector::zeros(self.schema.segment(&self.visual)?.len))?;
        Ok(self.retrieve(&cue)?.0)
    }

    /// Visual popcounts of noisy stored patterns after completion, and the
    /// `band` percentiles of their distribution.
    pub fn estimate_acceptance_interval<R: Rng + ?Sized>(
        &self,
        samples: &[DesCode],
        p_del: f64,
        band: (f64, f64),
        rng: &mut R,
    ) -> Result<IntervalEstimate, MultimodalError> {
        if samples.is_empty() {
            return Err(MultimodalError::EmptySample);
        }
        if !(0.0 <= band.0 && band.0 <= band.1 && band.1 <= 100.0) {
            return Err(MultimodalError::InvalidConfig(format!("bad percentile band {band:?}")));
        }
        let mut counts = Vec::with_capacity(samples.len());
        for s in samples {
            let noisy = delete_bits(&self.visual_of(s), p_del, rng);
            let (out, _) = self.retrieve(&s.replace(&self.visual, &noisy)?)?;
            counts.push(self.visual_of(&out).count_ones());
        }
        let mut sorted = counts.clone();
        sorted.sort_unstable();
        Ok(IntervalEstimate {
            low: percentile(&sorted, band.0),
            high: percentile(&sorted, band.1),
            counts,
        })
    }

    /// Iterative generation: retrieve from `(description | seed)`, stop when
    /// the visual popcount lands strictly inside the acceptance interval,
    /// otherwise sparsify the response to `S` bits as the next seed and grow
    /// `S` by the increment.
    pub fn generate<R: Rng + ?Sized>(
        &self,
        label: usize,
        cfg: &GenerationConfig,
        rng: &mut R,
    ) -> Result<Generation, MultimodalError> {
        cfg.validate()?;
        let description = self.nxh.encode(label, rng)?;
        let mut seed = BitVector::zeros(self.schema.segment(&self.visual)?.len);
        let mut sparsity = cfg.initial_sparsity;
        let mut trace = Vec::new();
        for iteration in 1..=cfg.max_iters {
            let (out, r) = self.retrieve(&self.code(&description, &seed)?)?;
            if r.max_potential == 0 {
                return Err(MultimodalError::NoEvidence);
            }
            let visual = self.visual_of(&out);
            let count = visual.count_ones();
            if cfg.accepts(count) {
                trace.push(TraceStep {
                    iteration,
                    after_retrieve: count,
                    after_sparsify: None,
                    sparsity,
                });
                return Ok(Generation {
                    code: out,
                    iterations: iteration,
                    trace,
                });
            }
            seed = sparsify(&visual, sparsity, rng);
            trace.push(TraceStep {
                iteration,
                after_retrieve: count,
                after_sparsify: Some(seed.count_ones()),
                sparsity,
            });
            sparsity += cfg.sparsity_increment;
        }
        Err(MultimodalError::NoConvergence {
            iterations: cfg.max_iters,
            trace,
        })
    }
}

impl NxhConfig {
    /// The full interval of `label` with no noise.
    pub fn x_hot_code(&self, label: usize) -> Result<BitVector, CodecError> {
        if label >= self.classes {
            return Err(CodecError::LabelOutOfRange {
                label,
                classes: self.classes,
            });
        }
        let x = self.bits_per_class;
        Ok(BitVector::from_active(self.code_len(), (label * x..(label + 1) * x).collect()).expect("in range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::from_01(bits)
    }

    #[test]
    fn schema_offsets_and_errors() {
        let s = ModalitySchema::new([("a", 2), ("b", 4)]).unwrap();
        assert_eq!(s.total_len(), 6);
        assert_eq!(s.range("b").unwrap(), 2..6);
        assert_eq!(
            ModalitySchema::new([("a", 2), ("a", 1)]),
            Err(MultimodalError::DuplicateModality("a".into()))
        );
        assert_eq!(
            ModalitySchema::new([("a", 0)]),
            Err(MultimodalError::EmptyModality("a".into()))
        );
        assert!(matches!(s.range("c"), Err(MultimodalError::UnknownModality(_))));
    }

    #[test]
    fn concat_mask_replace() {
        let x1 = DesCode::concat(vec![("a", bv(&[0, 1])), ("b", bv(&[0, 0, 1, 1]))]).unwrap();
        assert_eq!(x1.bits(), &bv(&[0, 1, 0, 0, 1, 1]));
        assert_eq!(x1.mask("b").unwrap().bits(), &bv(&[0, 1, 0, 0, 0, 0]));
        let single = DesCode::concat(vec![("only", bv(&[1, 0, 1]))]).unwrap();
        assert_eq!(single.bits(), &bv(&[1, 0, 1]));
        assert_eq!(single.schema().segments().len(), 1);

        let swapped = x1.replace("a", &bv(&[1, 0])).unwrap();
        assert_eq!(swapped.bits(), &bv(&[1, 0, 0, 0, 1, 1]));
        assert!(x1.replace("a", &bv(&[1, 0, 0])).is_err());
        assert!(x1.mask("z").is_err());

        let empty_b = DesCode::concat(vec![("a", bv(&[1, 1])), ("b", bv(&[0, 0, 0, 0]))]).unwrap();
        assert_eq!(empty_b.mask("b").unwrap(), empty_b);
    }

    #[test]
    fn assemble_fills_missing_with_zero() {
        let schema = Arc::new(ModalitySchema::new([("d", 3), ("v", 2)]).unwrap());
        let v = bv(&[1, 1]);
        let code = DesCode::assemble(&schema, [("v", &v)]).unwrap();
        assert_eq!(code.bits(), &bv(&[0, 0, 0, 1, 1]));
        assert!(DesCode::assemble(&schema, [("v", &v), ("v", &v)]).is_err());
    }

    #[test]
    fn percentile_nearest_rank() {
        let s = [1, 2, 3, 4, 5];
        assert_eq!(percentile(&s, 0.0), 1);
        assert_eq!(percentile(&s, 100.0), 5);
        assert_eq!(percentile(&s, 50.0), 3);
        assert_eq!(percentile(&s, 25.0), 2);
    }

    fn tiny() -> (WillshawMemory, Arc<ModalitySchema>, NxhConfig) {
        // description: 2 classes x 2 bits, visual: 6 bits
        let nxh = NxhConfig {
            classes: 2,
            bits_per_class: 2,
            p_class: 1.0,
            p_rest: 0.0,
        };
        let schema = Arc::new(ModalitySchema::new([("description", 4), ("visual", 6)]).unwrap());
        (WillshawMemory::auto(10), schema, nxh)
    }

    #[test]
    fn fresh_memory_gives_no_evidence_and_empty_blob() {
        let (mem, schema, nxh) = tiny();
        let mm = MultiModal::new(&mem, schema, "description", "visual", nxh).unwrap();
        let cue = mm.code(&BitVector::zeros(4), &bv(&[1, 1, 0, 0, 0, 0])).unwrap();
        assert_eq!(mm.classify(&cue).unwrap(), Classification::NoEvidence);
        assert!(mm.make_blob(1).unwrap().bits().is_zero());
        let cfg = GenerationConfig {
            interval_low: 1,
            interval_high: 5,
            initial_sparsity: 1,
            sparsity_increment: 1,
            max_iters: 3,
        };
        assert_eq!(
            mm.generate(0, &cfg, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(MultimodalError::NoEvidence)
        );
    }

    #[test]
    fn single_attractor_generates_on_first_iteration() {
        let (mut mem, schema, nxh) = tiny();
        let stored = DesCode::assemble(
            &schema,
            [("description", &bv(&[0, 0, 1, 1])), ("visual", &bv(&[0, 1, 1, 0, 1, 0]))],
        )
        .unwrap();
        mem.store_auto(stored.bits()).unwrap();
        let mm = MultiModal::new(&mem, schema, "description", "visual", nxh).unwrap();
        let cfg = GenerationConfig {
            interval_low: 2,
            interval_high: 4,
            initial_sparsity: 1,
            sparsity_increment: 1,
            max_iters: 10,
        };
        let g = mm.generate(1, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(g.iterations, 1);
        assert_eq!(g.code, stored);
        assert_eq!(g.trace.len(), 1);
        assert_eq!(g.trace[0].after_sparsify, None);

        let cue = mm.without_description(&stored);
        assert_eq!(
            mm.classify(&cue).unwrap(),
            Classification::Label {
                label: 1,
                confidence: 1.0
            }
        );
    }

    #[test]
    fn unreachable_interval_reports_no_convergence() {
        let (mut mem, schema, nxh) = tiny();
        let stored = DesCode::assemble(
            &schema,
            [("description", &bv(&[1, 1, 0, 0])), ("visual", &bv(&[1, 1, 0, 0, 0, 0]))],
        )
        .unwrap();
        mem.store_auto(stored.bits()).unwrap();
        let mm = MultiModal::new(&mem, schema, "description", "visual", nxh).unwrap();
        let cfg = GenerationConfig {
            interval_low: 4,
            interval_high: 6,
            initial_sparsity: 0,
            sparsity_increment: 1,
            max_iters: 5,
        };
        match mm.generate(0, &cfg, &mut ChaCha8Rng::seed_from_u64(0)) {
            Err(MultimodalError::NoConvergence { iterations, trace }) => {
                assert_eq!(iterations, 5);
                assert_eq!(trace.len(), 5);
                assert!(trace.iter().all(|t| t.after_retrieve == 2));
                assert_eq!(trace.iter().map(|t| t.sparsity).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
            }
            other => panic!("expected no convergence, got {other:?}"),
        }
    }

    #[test]
    fn interval_extreme_band_is_min_max() {
        let (mut mem, schema, nxh) = tiny();
        let a = DesCode::assemble(
            &schema,
            [("description", &bv(&[1, 1, 0, 0])), ("visual", &bv(&[1, 1, 1, 0, 0, 0]))],
        )
        .unwrap();
        let b = DesCode::assemble(
            &schema,
            [("description", &bv(&[0, 0, 1, 1])), ("visual", &bv(&[0, 0, 0, 0, 1, 1]))],
        )
        .unwrap();
        mem.store_auto(a.bits()).unwrap();
        mem.store_auto(b.bits()).unwrap();
        let mm = MultiModal::new(&mem, schema, "description", "visual", nxh).unwrap();
        let est = mm
            .estimate_acceptance_interval(&[a, b], 0.0, (0.0, 100.0), &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        assert_eq!(est.counts, vec![3, 2]);
        assert_eq!((est.low, est.high), (2, 3));
        assert_eq!(
            mm.estimate_acceptance_interval(&[], 0.5, (25.0, 75.0), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(MultimodalError::EmptySample)
        );
    }

    #[test]
    fn wiring_errors() {
        let (mem, schema, nxh) = tiny();
        assert!(matches!(
            MultiModal::new(&mem, schema.clone(), "nope", "visual", nxh),
            Err(MultimodalError::UnknownModality(_))
        ));
        let wrong = NxhConfig {
            bits_per_class: 3,
            ..nxh
        };
        assert!(MultiModal::new(&mem, schema.clone(), "description", "visual", wrong).is_err());
        let mm = MultiModal::new(&mem, schema, "description", "visual", nxh).unwrap();
        let foreign = DesCode::concat(vec![("x", BitVector::zeros(10))]).unwrap();
        assert_eq!(mm.retrieve(&foreign).unwrap_err(), MultimodalError::SchemaMismatch);
    }
}
