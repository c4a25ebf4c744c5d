#pragma once

#include <stdexcept>
#include <string>

namespace docret {

// Base of every error the library throws. The CLI maps NumericalError to
// exit code 3 and every other Error to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

// Bad magic, unsupported version, malformed header.
class FormatError : public Error {
public:
    using Error::Error;
};

// Structurally valid header but truncated or trailing payload.
class CorruptionError : public Error {
public:
    using Error::Error;
};

class IngestionError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace docret
