#pragma once

#include <stdexcept>
#include <string>

namespace qpvi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A formula was asked to divide by a quantity that vanishes for these inputs.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A computed object violates an invariant that must hold by construction.
class ConsistencyFailure : public Error {
public:
    using Error::Error;
};

/// Parameters hit a lattice q^Z condition that some construction excludes.
class ParameterDegeneracy : public Error {
public:
    using Error::Error;
};

/// Near-resonant divisor in a series recursion.
class ResonanceError : public Error {
public:
    using Error::Error;
};

/// Indeterminate 0/0 in a step of the qPVI map; label names the base point.
class SingularityEncountered : public Error {
public:
    SingularityEncountered(std::string label, int m)
        : Error("indeterminate step at base point " + label + " (m=" + std::to_string(m) + ")"),
          label_(std::move(label)),
          m_(m) {}
    const std::string& label() const noexcept { return label_; }
    int index() const noexcept { return m_; }

private:
    std::string label_;
    int m_;
};

/// A12 of the coefficient matrix vanishes identically.
class ReducibleLax : public Error {
public:
    using Error::Error;
};

/// Evaluation point too close to a zero of det Psi or to a pole.
class NearPole : public Error {
public:
    using Error::Error;
};

/// Matrix expected to be rank one is numerically invertible.
class NotSingular : public Error {
public:
    using Error::Error;
};

class ZeroMatrix : public Error {
public:
    using Error::Error;
};

/// The monodromy point lies on the excised curve X.
class OnCurveX : public Error {
public:
    using Error::Error;
};

/// The quadric coefficients require t0 kt k1 kinf^2 off q^Z.
class EliminationDegenerate : public Error {
public:
    using Error::Error;
};

/// Null space of a homogeneous system is not one dimensional.
class AmbiguousNullSpace : public Error {
public:
    using Error::Error;
};

class ConstraintError : public Error {
public:
    using Error::Error;
};

class NoAdmissibleContour : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

/// The orthogonal polynomial problem has no solution at this degree (Hankel determinant vanishes).
class NotSolvable : public Error {
public:
    NotSolvable(const std::string& what, int n) : Error(what), n_(n) {}
    int degree() const noexcept { return n_; }

private:
    int n_;
};

}  // namespace qpvi
