#pragma once

#include <stdexcept>
#include <string>

namespace ssrn {

// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor/layer dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A value violates an operation's contract (bad rate, non-binary mask, ...).
class ValueError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure (missing file, unwritable path).
class IoError : public Error {
public:
    using Error::Error;
};

// File exists but its content is malformed.
class FormatError : public Error {
public:
    using Error::Error;
};

// Non-finite values showed up where finite arithmetic is required.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace ssrn
