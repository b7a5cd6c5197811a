#ifndef IVAE_COMMON_FORMAT_H_
#define IVAE_COMMON_FORMAT_H_

#include <string>
#include <string_view>
#include <vector>

namespace ivae {

// Shortest-round-trip decimal rendering of a double ("%.17g" class
// precision); parsing the result with ParseDouble gives back the same bits.
std::string FormatDouble(double value);

// Strict full-string parse. Accepts "nan", "inf", "-inf". Throws ParseError.
double ParseDouble(std::string_view text);
long long ParseInt(std::string_view text);

std::vector<std::string> SplitString(std::string_view text, char delimiter);
std::string_view Trim(std::string_view text);

}  // namespace ivae

#endif  // IVAE_COMMON_FORMAT_H_
