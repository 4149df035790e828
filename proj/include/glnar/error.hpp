#pragma once

#include <stdexcept>
#include <string>

namespace glnar {

/// Error categories; the numeric values double as CLI exit codes.
enum class ErrorKind : int {
    config = 2,
    data = 3,
    estimation = 4,
    evaluation = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Malformed input text; carries the 1-based line number.
struct ParseError : DataError {
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : DataError(source + ":" + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

/// Argument outside the mathematical domain of a function (e.g. x not in (0,1)).
struct DomainError : DataError {
    explicit DomainError(const std::string& what) : DataError(what) {}
};

struct EstimationError : Error {
    explicit EstimationError(const std::string& what) : Error(ErrorKind::estimation, what) {}
};

struct EvaluationError : Error {
    explicit EvaluationError(const std::string& what) : Error(ErrorKind::evaluation, what) {}
};

} // namespace glnar
