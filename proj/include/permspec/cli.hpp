#pragma once

#include "permspec/limits.hpp"
#include "permspec/spectral.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace permspec {

inline constexpr const char* kSchemaVersion = "1.0";

// An endpoint token as given on the command line:
//   0.25           decimal literal, read as the exact rational 1/4
//   1e-3 / 0.1...  other float syntax, kept as a plain double with no class
//   rat:p/q        exact rational
//   irr:golden     golden ratio minus 1   (also irr:sqrt2 = sqrt(2)-1,
//                  irr:sqrt3 = sqrt(3)-1, irr:e = e-2); declared irrational
//   affine:p/q+r/s*alpha   beta = p/q + (r/s) alpha, only as beta
struct EndpointToken {
    enum class Kind { plain, rational, irrational, affine };

    std::string text;
    Kind kind = Kind::plain;
    Endpoint endpoint;
    std::string irrational_name;
    std::int64_t p = 0, q = 1, r = 0, s = 1;  // affine coefficients
};

// Throws std::invalid_argument on malformed tokens. `alpha` is required for affine tokens.
EndpointToken parse_endpoint_token(const std::string& text, const EndpointToken* alpha = nullptr);

// Arithmetic class of the pair, when both endpoints carry one.
std::optional<ArcClass> classify(const EndpointToken& alpha, const EndpointToken& beta);
std::optional<RealClass> classify_width(const EndpointToken& alpha, const EndpointToken& beta);

std::string class_name(const ArcClass& cls);

// Runs one CLI invocation; args exclude the program name. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace permspec
