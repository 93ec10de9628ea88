#include "sparseconf/error.hpp"

namespace sparseconf {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::NotStronglyConvex: return "NotStronglyConvex";
    case ErrorKind::PathTooLong: return "PathTooLong";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

} // namespace sparseconf
