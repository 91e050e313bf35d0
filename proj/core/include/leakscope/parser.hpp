#pragma once

#include <string>
#include <vector>

#include "leakscope/ast.hpp"
#include "leakscope/token.hpp"

namespace leakscope {

/// Recursive-descent parser for the .hyleak language (grammar in
/// docs/grammar.ebnf). Throws ParseError as "file:line:col: message".
Program parse(const std::vector<Token>& tokens,
              const std::string& file = "<input>");

Program parse_source(std::string_view source,
                     const std::string& file = "<input>");

Program parse_file(const std::string& path);

}  // namespace leakscope
