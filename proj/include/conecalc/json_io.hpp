#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "conecalc/contour.hpp"
#include "conecalc/types.hpp"

namespace conecalc::io {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal representation of a double.
std::string double_to_string(double x);

// Numbers are serialized as JSON numbers; complex values as [re, im] pairs.
Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);
Json cvec_to_json(const CVec& v);
CVec cvec_from_json(const Json& j);
Json rvec_to_json(const RVec& v);
RVec rvec_from_json(const Json& j);
Json cmat_to_json(const CMat& m);
CMat cmat_from_json(const Json& j);

Json contour_to_json(const sectors::Contour& c);
sectors::Contour contour_from_json(const Json& j);

// Throws InvalidRequestError when `j` is not an object or contains a key
// outside `allowed`. `where` names the object in the error message.
void validate_keys(const Json& j, const std::vector<std::string>& allowed,
                   const std::string& where);

// Fetch helpers that raise InvalidRequestError with a readable message.
double require_number(const Json& j, const std::string& key,
                      const std::string& where);
double number_or(const Json& j, const std::string& key, double fallback,
                 const std::string& where);
int require_int(const Json& j, const std::string& key,
                const std::string& where);
int int_or(const Json& j, const std::string& key, int fallback,
           const std::string& where);
std::string string_or(const Json& j, const std::string& key,
                      const std::string& fallback, const std::string& where);
bool bool_or(const Json& j, const std::string& key, bool fallback,
             const std::string& where);

// Report envelope shared by every subcommand. `results` and `verdicts` are
// filled by the caller; `verdicts` entries should be objects with keys
// {condition, verdict, violations, parameters}.
Json report_envelope(const std::string& command, std::uint64_t seed,
                     const Json& parameters);

// Writes text with LF endings, creating parent directories as needed.
void write_text_file(const std::string& path, const std::string& text);

// CSV writer: one header row then data rows; fields joined with ','.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

}  // namespace conecalc::io
