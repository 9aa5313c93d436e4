#pragma once

#include <stdexcept>
#include <string>

namespace qcm {

// Input outside the domain of an operation: off-chart points, zero vectors,
// non-Hermitian observables, dimension mismatches.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The pulled-back metric is singular (point on or numerically at the chart
// boundary).
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// M^ij = g^ab ∇aΦ^i ∇bΦ^j exceeded the condition threshold.
class SingularGramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A variance vanished where a correlation was requested.
class EigenstateDegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcm
