#pragma once

#include <stdexcept>
#include <string>

namespace logtriage {

// Base class for every failure the library reports deliberately.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ingest
class EmptyLogError : public Error { public: using Error::Error; };
class MissingFileError : public Error { public: using Error::Error; };
class MalformedManifestRowError : public Error { public: using Error::Error; };

// vectorize
class NoFailingLogsError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class DegenerateRowError : public Error { public: using Error::Error; };

// dimred
class RankDeficientError : public Error { public: using Error::Error; };
class NonNegativityError : public Error { public: using Error::Error; };

// cluster
class ZeroVectorError : public Error { public: using Error::Error; };

// metrics
class LengthMismatchError : public Error { public: using Error::Error; };
class RangeError : public Error { public: using Error::Error; };

// stats
class IncompleteDesignError : public Error { public: using Error::Error; };
class EmptySampleError : public Error { public: using Error::Error; };
class MissingComparisonError : public Error { public: using Error::Error; };

// synth
class SpecError : public Error { public: using Error::Error; };

// pipeline / report
class IncompleteGridError : public Error { public: using Error::Error; };
class FingerprintMismatchError : public Error { public: using Error::Error; };

} // namespace logtriage
