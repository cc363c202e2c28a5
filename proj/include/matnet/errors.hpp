#pragma once

#include <stdexcept>
#include <string>

namespace matnet {

/// Base class for all matnet errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Graph construction / validation.

class Disconnected : public Error {
 public:
  using Error::Error;
};

class NonSPDWeight : public Error {
 public:
  NonSPDWeight(int edge, const std::string& what)
      : Error(what), edge(edge) {}
  int edge;
};

class NonPositiveScale : public Error {
 public:
  NonPositiveScale(int node, int substate, const std::string& what)
      : Error(what), node(node), substate(substate) {}
  int node;
  int substate;
};

class DuplicateEdge : public Error {
 public:
  using Error::Error;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

// Edge transform / spectral machinery.

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class NotHurwitz : public Error {
 public:
  using Error::Error;
};

class NotATree : public Error {
 public:
  using Error::Error;
};

class SolveFailed : public Error {
 public:
  using Error::Error;
};

class NonPD : public Error {
 public:
  using Error::Error;
};

class OrderingViolated : public Error {
 public:
  using Error::Error;
};

// Design procedures.

class SingularCutGram : public Error {
 public:
  using Error::Error;
};

class ProjectionDiverged : public Error {
 public:
  using Error::Error;
};

// Simulation / IO.

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace matnet
