#pragma once

#include <stdexcept>
#include <string>

namespace valley {

// Base of every error raised by the library. kind() is a stable, machine
// readable tag used by the CLI diagnostic line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain_error", what) {}
};

// q-moment that does not exist for the requested order/parameters.
class DivergentMoment : public Error {
 public:
  explicit DivergentMoment(const std::string& what) : Error("divergent_moment", what) {}
};

// Operation not defined for the given weight family.
class UnsupportedModel : public Error {
 public:
  explicit UnsupportedModel(const std::string& what) : Error("unsupported_model", what) {}
};

// Saddle-point evaluation requested at a degenerate order (q = 0).
class SaddleDegenerate : public Error {
 public:
  explicit SaddleDegenerate(const std::string& what) : Error("saddle_degenerate", what) {}
};

class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t index)
      : Error("ingest_error", what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// Too few points, malformed input shapes, etc.
class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error("fit_error", what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format_error", what) {}
};

}  // namespace valley
