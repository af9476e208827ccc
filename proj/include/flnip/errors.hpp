#pragma once

#include <stdexcept>

namespace flnip {

// Base type for every failure the library reports.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// pixelgrid
struct MalformedHeader : Error { using Error::Error; };
struct MaxvalTooLarge : Error { using Error::Error; };
struct TruncatedPayload : Error { using Error::Error; };
struct ImageTooSmall : Error { using Error::Error; };
struct SizeMismatch : Error { using Error::Error; };

// gaussian
struct NonPositiveSigma : Error { using Error::Error; };

// patterns
struct IndexOutOfRange : Error { using Error::Error; };
struct ZeroReference : Error { using Error::Error; };
struct EmptyMap : Error { using Error::Error; };

// metrics
struct LengthMismatch : Error { using Error::Error; };
struct AllZeroWeights : Error { using Error::Error; };

// evolver
struct TooFewRecords : Error { using Error::Error; };
struct EmptyCategory : Error { using Error::Error; };
struct EmptyPopulation : Error { using Error::Error; };

// retrieval
struct DuplicateId : Error { using Error::Error; };
struct NOutOfRange : Error { using Error::Error; };
struct BadMagic : Error { using Error::Error; };
struct VersionUnsupported : Error { using Error::Error; };
struct CorruptRecord : Error { using Error::Error; };
struct ChecksumMismatch : Error { using Error::Error; };

// datasets
struct EmptyCorpus : Error { using Error::Error; };
struct UndecodableFile : Error { using Error::Error; };

// filesystem plumbing
struct IoError : Error { using Error::Error; };

} // namespace flnip
