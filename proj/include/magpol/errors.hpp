#pragma once

#include <stdexcept>
#include <string>

namespace magpol {

// Thrown when the closed Hopfield model sits at or beyond the superradiant
// instability: det(M) <= 0, one squared eigenfrequency is zero or negative and
// no real polariton spectrum exists. Carries det(M) so callers can report how
// far past the boundary the parameter point is, and the field value when the
// failure happened inside a sweep.
class SupercriticalError : public std::runtime_error {
public:
    SupercriticalError(const std::string& what, double det_m)
        : std::runtime_error(what), det_m_(det_m) {}

    SupercriticalError(const std::string& what, double det_m, double mu0_H)
        : std::runtime_error(what), det_m_(det_m), mu0_H_(mu0_H), has_field_(true) {}

    double det_m() const noexcept { return det_m_; }
    bool has_field() const noexcept { return has_field_; }
    double mu0_H() const noexcept { return mu0_H_; }

private:
    double det_m_;
    double mu0_H_ = 0.0;
    bool has_field_ = false;
};

// Diamagnetic suppression factor B >= 1: the critical coupling diverges and the
// superradiant transition is forbidden no matter how large the coupling gets.
class NoGoLimitError : public std::domain_error {
public:
    explicit NoGoLimitError(const std::string& what) : std::domain_error(what) {}
};

} // namespace magpol
