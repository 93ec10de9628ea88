#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparseconf {

enum class ErrorKind {
    InvalidArgument,
    NonFiniteIterate,
    SingularSystem,
    OutOfRange,
    InsufficientData,
    ParseError,
    MissingLabelColumn,
    NonNumericCell,
    NotStronglyConvex,
    PathTooLong,
    Io,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type; `kind()` is stable
// and is what the CLI prints in its structured error message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// CSV ingestion errors carry the offending location (1-based data row, 0-based column).
class CsvError : public Error {
public:
    CsvError(ErrorKind kind, const std::string& what, long row, long column)
        : Error(kind, what), row_(row), column_(column) {}

    long row() const noexcept { return row_; }
    long column() const noexcept { return column_; }

private:
    long row_;
    long column_;
};

} // namespace sparseconf
