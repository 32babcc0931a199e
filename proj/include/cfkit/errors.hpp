#ifndef CFKIT_ERRORS_HPP_
#define CFKIT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input row; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

/// Model file damaged; carries the byte offset where reading stopped making sense.
class CorruptModelError : public Error {
 public:
  CorruptModelError(const std::string& msg, std::size_t byte_offset)
      : Error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& msg, int epoch)
      : Error(msg + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// A metric had no evaluable user at all.
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace cfkit

#endif  // CFKIT_ERRORS_HPP_
