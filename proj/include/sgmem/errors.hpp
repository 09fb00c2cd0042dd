#pragma once

#include <stdexcept>
#include <string>

namespace sgmem {

// Base class for all engine errors. Subtypes carry no extra state; the
// what() string names the offending unit or file.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class EmptySession : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

class ProviderUnavailable : public Error {
 public:
  using Error::Error;
};

class LlmUnavailable : public Error {
 public:
  using Error::Error;
};

class EmptyCompletion : public Error {
 public:
  using Error::Error;
};

class MalformedJson : public Error {
 public:
  using Error::Error;
};

class UnknownTable : public Error {
 public:
  using Error::Error;
};

class UnknownNode : public Error {
 public:
  using Error::Error;
};

class OrphanSentence : public Error {
 public:
  using Error::Error;
};

class GraphMissing : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaVersionMismatch : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgmem
