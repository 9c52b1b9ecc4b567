#pragma once

#include <stdexcept>
#include <string>

namespace rdic {

// Base class for all library failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input data: raster headers, model JSON, JPEG bitstreams.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace rdic
