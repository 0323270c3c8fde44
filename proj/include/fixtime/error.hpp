#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixtime {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A dump line that could not be decoded (abort mode only).
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class FormatError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class CorpusEmpty : public Error {
  public:
    using Error::Error;
};

class VocabularyEmpty : public Error {
  public:
    using Error::Error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

class MissingEmbedding : public Error {
  public:
    explicit MissingEmbedding(std::string key)
        : Error("no embedding for issue '" + key + "'"), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
};

class TooFewDocuments : public Error {
  public:
    using Error::Error;
};

class DivergenceError : public Error {
  public:
    explicit DivergenceError(std::size_t epoch)
        : Error("training loss became non-finite at epoch " + std::to_string(epoch)), epoch_(epoch) {}
    [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }

  private:
    std::size_t epoch_;
};

class StratificationError : public Error {
  public:
    StratificationError(std::string class_name, std::size_t count, std::size_t required)
        : Error("class " + class_name + " has " + std::to_string(count) + " samples, " + std::to_string(required) +
                " required"),
          class_name_(std::move(class_name)) {}
    [[nodiscard]] const std::string& class_name() const noexcept { return class_name_; }

  private:
    std::string class_name_;
};

/// A request body that failed schema validation; names the offending fields.
class ValidationError : public Error {
  public:
    ValidationError(const std::string& message, std::vector<std::string> fields)
        : Error(message), fields_(std::move(fields)) {}
    [[nodiscard]] const std::vector<std::string>& fields() const noexcept { return fields_; }

  private:
    std::vector<std::string> fields_;
};

/// A what-if request that tried to modify fields outside the overridable set.
class OverrideError : public Error {
  public:
    explicit OverrideError(std::vector<std::string> fields)
        : Error(make_message(fields)), fields_(std::move(fields)) {}
    [[nodiscard]] const std::vector<std::string>& fields() const noexcept { return fields_; }

  private:
    static std::string make_message(const std::vector<std::string>& fields) {
        std::string msg = "fields cannot be overridden:";
        for (const auto& f : fields) {
            msg += ' ';
            msg += f;
        }
        return msg;
    }
    std::vector<std::string> fields_;
};

/// Operation called before the component it depends on was fitted.
class OrderingError : public Error {
  public:
    using Error::Error;
};

}  // namespace fixtime
