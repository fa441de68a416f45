#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conelab {

  class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  // Malformed group, element, function or rational literal.  The position is
  // a 0-based offset into the text that was being parsed.
  class ParseError : public Error {
   public:
    ParseError(std::string const& message, std::size_t position)
        : Error("at position " + std::to_string(position) + ": " + message),
          detail_(message),
          position_(position) {}

    std::size_t position() const noexcept {
      return position_;
    }

    // The message without the position prefix.
    std::string const& detail() const noexcept {
      return detail_;
    }

   private:
    std::string detail_;
    std::size_t position_;
  };

  class GroupMismatch : public Error {
   public:
    using Error::Error;
  };

  // A ball, word enumeration or search grew past the configured element cap.
  class CapExceeded : public Error {
   public:
    using Error::Error;
  };

  class PreconditionError : public Error {
   public:
    using Error::Error;
  };

  class UnsupportedError : public Error {
   public:
    using Error::Error;
  };

}  // namespace conelab
