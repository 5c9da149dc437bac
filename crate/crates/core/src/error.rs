use thiserror::Error;

/// Errors raised anywhere in the analyzer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero input where a nonzero value is required")]
    ZeroInput,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("polynomial has zero constant term")]
    ZeroConstantTerm,
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("factor {0} is not p-regular at p = {1}; supply a certificate or choose another prime")]
    NotPRegular(String, u64),
    #[error("certificate rejected: {0}")]
    BadCertificate(String),
    #[error("p-adic precision exhausted at {0} digits")]
    PrecisionExhausted(u32),
    #[error("polynomial is not self-reciprocal")]
    NotSelfReciprocal,
    #[error("polynomial has odd degree")]
    OddDegree,
    #[error("polynomial is not irreducible over Q")]
    NotIrreducible,
    #[error("degenerate quadratic form")]
    DegenerateForm,
    #[error("inputs use different primes")]
    PrimeMismatch,
    #[error("invariant triple is not realized by any quadratic space")]
    InadmissibleInvariant,
    #[error("matrix dimensions do not match: {0}")]
    SizeMismatch(String),
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not an isometry of the form")]
    NotAnIsometry,
    #[error("matrix is singular")]
    Singular,
    #[error("degenerate hermitian input")]
    DegenerateInput,
    #[error("search exhausted its candidate set: {0}")]
    SearchExhausted(String),
    #[error("minimal polynomial of the action does not match the algebra")]
    MinPolyMismatch,
    #[error("trace pairing is singular")]
    SingularTracePairing,
    #[error("filtration ranks are inconsistent")]
    RankMismatch,
    #[error("residual form is degenerate")]
    DegenerateResidual,
    #[error("projectors are inconsistent")]
    ProjectorInconsistency,
    #[error("ambient quadratic spaces are not isometric")]
    AmbientNotIsometric,
    #[error("level must be odd for this construction")]
    EvenLevel,
    #[error("level must be even for a +-1 hyperbolic block")]
    OddLevelForPM1,
    #[error("rank must be even for a +-1 block of even level")]
    OddRankForEvenLevel,
    #[error("zero entry in residual data")]
    ZeroEntry,
    #[error("empty block specification")]
    EmptySpec,
    #[error("invalid block specification: {0}")]
    InvalidSpec(String),
    #[error("constant search failed: {0}")]
    ConstantSearchFailed(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
