#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fame::corpus {

/// Porter (1980) suffix-stripping stemmer. Input must be lowercase ASCII letters.
std::string porter_stem(std::string_view word);

/// Returns the named stopword list, or an empty list for "none".
/// Throws fame::Error for an unknown name.
const std::vector<std::string>& stopword_list(std::string_view name);
bool is_stopword(std::string_view name, std::string_view word);

}  // namespace fame::corpus
