#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapeloss {

// Base for every error the engine raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A descriptor that divides by the class mass was requested on a class whose
// mass is at or below the degeneracy threshold.
class DegenerateClassError : public Error {
public:
    DegenerateClassError(std::size_t cls, double mass, const std::string& what)
        : Error(what), cls_(cls), mass_(mass) {}

    std::size_t class_index() const noexcept { return cls_; }
    double mass() const noexcept { return mass_; }

private:
    std::size_t cls_;
    double mass_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (at byte " + std::to_string(byte_offset) + ")"), offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Spec or config is self-inconsistent (lo > hi, class out of range, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A NaN/Inf showed up in a loss, gradient or parameter.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace shapeloss
