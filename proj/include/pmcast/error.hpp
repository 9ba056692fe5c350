#ifndef PMCAST_ERROR_HPP_
#define PMCAST_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmcast {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed pattern text. position() is the 0-based byte offset of the
/// offending character.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownSymbolError : public Error {
 public:
  explicit UnknownSymbolError(std::string symbol)
      : Error("unknown symbol '" + symbol + "'"), symbol_(std::move(symbol)) {}
  const std::string& symbol() const noexcept { return symbol_; }

 private:
  std::string symbol_;
};

/// Model file problems: I/O, version, shape or stochasticity violations.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Stream problems: out-of-order indices, too few events.
class StreamError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmcast

#endif  // PMCAST_ERROR_HPP_
