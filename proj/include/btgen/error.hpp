#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace btgen {

enum class ErrorCode {
    // tick / simulation
    UnboundLeaf,
    UnknownVariable,
    UnknownNode,
    DomainViolation,
    // xml / records / files
    MalformedXml,
    UnknownElement,
    MissingAttribute,
    DuplicateInstanceName,
    SchemaViolation,
    CrossRefViolation,
    DuplicateName,
    UnknownNodeType,
    Io,
    // synthesis
    NoCandidates,
    RemoteUnavailable,
    MalformedResponse,
    EmptyAfterFiltering,
    Exhausted,
    BudgetExhausted,
    Unsolvable,
    // metrics
    InvalidArgs,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnboundLeaf: return "UnboundLeaf";
        case ErrorCode::UnknownVariable: return "UnknownVariable";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::DomainViolation: return "DomainViolation";
        case ErrorCode::MalformedXml: return "MalformedXml";
        case ErrorCode::UnknownElement: return "UnknownElement";
        case ErrorCode::MissingAttribute: return "MissingAttribute";
        case ErrorCode::DuplicateInstanceName: return "DuplicateInstanceName";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::CrossRefViolation: return "CrossRefViolation";
        case ErrorCode::DuplicateName: return "DuplicateName";
        case ErrorCode::UnknownNodeType: return "UnknownNodeType";
        case ErrorCode::Io: return "Io";
        case ErrorCode::NoCandidates: return "NoCandidates";
        case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
        case ErrorCode::Exhausted: return "Exhausted";
        case ErrorCode::BudgetExhausted: return "BudgetExhausted";
        case ErrorCode::Unsolvable: return "Unsolvable";
        case ErrorCode::InvalidArgs: return "InvalidArgs";
    }
    return "Unknown";
}

/// 1-based position inside a text input; zero means "not applicable".
struct SourceLocation {
    int line = 0;
    int column = 0;
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, SourceLocation loc = {})
        : std::runtime_error(format(code, message, loc)), code_(code), loc_(loc), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    const SourceLocation& location() const noexcept { return loc_; }
    /// Message without the code prefix and location suffix.
    const std::string& detail() const noexcept { return detail_; }

private:
    static std::string format(ErrorCode code, const std::string& message, SourceLocation loc) {
        std::string out{to_string(code)};
        out += ": ";
        out += message;
        if (loc.line > 0) {
            out += " (line " + std::to_string(loc.line) + ", column " + std::to_string(loc.column) + ")";
        }
        return out;
    }

    ErrorCode code_;
    SourceLocation loc_;
    std::string detail_;
};

}  // namespace btgen
