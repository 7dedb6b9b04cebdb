#pragma once

#include <stdexcept>
#include <string>

namespace smilejump {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SMILEJUMP_ERROR(Name)                         \
    class Name : public Error {                       \
    public:                                           \
        using Error::Error;                           \
    }

SMILEJUMP_ERROR(DomainError);
SMILEJUMP_ERROR(ArbitrageViolation);
SMILEJUMP_ERROR(DegenerateGeometry);
SMILEJUMP_ERROR(IllConditioned);
SMILEJUMP_ERROR(ExtrapolationRefused);
SMILEJUMP_ERROR(SliceUnavailable);
SMILEJUMP_ERROR(InsufficientData);
SMILEJUMP_ERROR(EmptyPanel);
SMILEJUMP_ERROR(SchemaError);
SMILEJUMP_ERROR(ConfigError);

#undef SMILEJUMP_ERROR

// Carries the last bracket so callers can log where the search stalled.
class NotConverged : public Error {
public:
    NotConverged(const std::string& what, double lo, double hi)
        : Error(what), lo_(lo), hi_(hi) {}
    double bracket_lo() const noexcept { return lo_; }
    double bracket_hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

} // namespace smilejump
