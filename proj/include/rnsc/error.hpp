#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rnsc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad magic number, ragged CSV rows).
class FormatError : public Error {
public:
    using Error::Error;
};

/// File shorter than its header promises.
class LengthError : public Error {
public:
    using Error::Error;
};

/// Two inputs that must agree do not (image vs. label counts).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// A cell that should be numeric is not.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Argument outside its documented range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Not enough nonzero eigenvalues for the request.
class RankError : public Error {
public:
    RankError(const std::string& what, int components)
        : Error(what), components_(components) {}

    int components() const noexcept { return components_; }

private:
    int components_;
};

/// A structural precondition on a graph or matrix does not hold.
class ContractError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// Experiment configuration rejected; carries every offending field.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "invalid configuration:";
        for (const auto& item : items) {
            out += "\n  ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

}  // namespace rnsc
