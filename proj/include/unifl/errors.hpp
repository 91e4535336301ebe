#pragma once

#include <stdexcept>
#include <string>

namespace unifl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DuplicateEdge : Error {
    DuplicateEdge(int u, int v)
        : Error("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")") {}
};

struct NegativeDistance : Error {
    NegativeDistance(int u, int v, double w)
        : Error("negative distance " + std::to_string(w) + " on edge (" + std::to_string(u) +
                "," + std::to_string(v) + ")") {}
};

struct VertexOutOfRange : Error {
    explicit VertexOutOfRange(int v)
        : Error("vertex id " + std::to_string(v) + " out of range") {}
};

struct ParseError : Error {
    ParseError(int line, const std::string& what)
        : Error("parse error at line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

struct InvariantViolation : Error {
    using Error::Error;
};

struct NonPositiveC : Error {
    NonPositiveC() : Error("scale constant c must be positive") {}
};

struct ProbOutOfRange : Error {
    explicit ProbOutOfRange(int v)
        : Error("probability for vertex " + std::to_string(v) + " outside [0,1]") {}
};

struct InfeasibleSolution : Error {
    explicit InfeasibleSolution(int v)
        : Error("vertex " + std::to_string(v) + " is neither open nor validly assigned"),
          vertex(v) {}
    int vertex;
};

struct TooLarge : Error {
    explicit TooLarge(int n)
        : Error("instance with n=" + std::to_string(n) + " exceeds the exhaustive limit") {}
};

struct IoError : Error {
    using Error::Error;
};

struct NonFiniteActivation : Error {
    using Error::Error;
};

struct TapeMismatch : Error {
    using Error::Error;
};

struct DivergedLoss : Error {
    using Error::Error;
};

}  // namespace unifl
