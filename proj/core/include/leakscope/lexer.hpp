#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "leakscope/token.hpp"

namespace leakscope {

/// Comments (//, #, /* */) stripped; positions are 1-based.
/// Throws LexError as "file:line:col: message".
std::vector<Token> tokenize(std::string_view source,
                            const std::string& file = "<input>");

}  // namespace leakscope
