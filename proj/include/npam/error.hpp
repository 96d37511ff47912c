#pragma once

#include <stdexcept>
#include <string>

namespace npam {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or semantically invalid input data.
class InputError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpusError : public InputError {
 public:
  using InputError::InputError;
};

// Malformed on-disk record (bag-of-words triple, snapshot, truth file).
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

// SyntheticSpec invariant violation.
class SpecError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

// Out-of-range model parameter (non-positive concentration, bad config).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Seating-state misuse: seating a seated token, unseating an unseated one.
class StateError : public Error {
 public:
  using Error::Error;
};

// FullPath that violates the entryway/category/table/menu/dish consistency rules.
class PathError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace npam
