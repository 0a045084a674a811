// Copyright 2026 The Fuzzoracle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Function inventory: a token-level C scanner that extracts top-level
// function definitions with their signatures, bodies, line spans,
// cyclomatic complexity and callee counts, plus signature-spec ingestion
// for functions supplied without source.

#ifndef FUZZORACLE_INVENTORY_H_
#define FUZZORACLE_INVENTORY_H_

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzzoracle/util.hpp"
#include "fuzzoracle/yamljson.hpp"

namespace fuzzoracle {

enum class Language { kC, kCxx };

struct SourceUnit {
  std::filesystem::path path;
  std::string content;
  Language language = Language::kC;
};

struct Param {
  std::string name;  // may be empty (unnamed parameter)
  std::string type;
};

struct FunctionRecord {
  std::string name;
  std::string return_type;
  std::vector<Param> params;
  std::string source_path;
  int line_start = 1;
  int line_end = 1;
  std::string body;  // exact source slice, signature through closing brace
  int cyclomatic_complexity = 1;
  int call_count = 0;
  bool is_variadic = false;
  bool has_function_pointer_param = false;
};

struct SignatureSpec {
  std::string function_name;
  std::string return_type;
  std::vector<Param> params;
  std::string source_file;
  std::vector<std::string> cwe_hints;
};

// --- Tokenizer ------------------------------------------------------------

enum class TokKind { kIdent, kNumber, kPunct, kString, kChar };

struct Token {
  TokKind kind;
  std::string text;
  int line;       // 1-based
  size_t offset;  // byte offset of first character in the source
};

namespace lex_detail {

inline bool IsIdentStart(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace lex_detail

// Scans C source into tokens, dropping comments, preprocessor directives
// and whitespace. String and character literals survive as single tokens so
// brace matching and keyword counting never look inside them.
inline std::vector<Token> TokenizeC(const std::string &src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1;
  bool at_line_start = true;
  const size_t n = src.size();

  auto advance_line = [&](char c) {
    if (c == '\n') {
      line++;
      at_line_start = true;
    }
  };

  while (i < n) {
    char c = src[i];
    if (c == '\n') {
      advance_line(c);
      i++;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      i++;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') i++;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
        advance_line(src[i]);
        i++;
      }
      i = (i + 1 < n) ? i + 2 : n;
      continue;
    }
    if (c == '#' && at_line_start) {
      // Directive, honoring backslash-newline continuations.
      while (i < n) {
        if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') {
          line++;
          i += 2;
          continue;
        }
        if (src[i] == '\n') break;
        i++;
      }
      continue;
    }
    at_line_start = false;
    if (c == '"' || c == '\'') {
      const char quote = c;
      const size_t start = i;
      const int start_line = line;
      i++;
      while (i < n && src[i] != quote) {
        if (src[i] == '\\' && i + 1 < n) {
          advance_line(src[i + 1]);
          i += 2;
          continue;
        }
        advance_line(src[i]);
        i++;
      }
      if (i < n) i++;  // closing quote
      out.push_back({quote == '"' ? TokKind::kString : TokKind::kChar,
                     src.substr(start, i - start), start_line, start});
      at_line_start = false;
      continue;
    }
    if (lex_detail::IsIdentStart(c)) {
      const size_t start = i;
      while (i < n && lex_detail::IsIdentChar(src[i])) i++;
      out.push_back({TokKind::kIdent, src.substr(start, i - start), line, start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const size_t start = i;
      while (i < n && (lex_detail::IsIdentChar(src[i]) || src[i] == '.' ||
                       ((src[i] == '+' || src[i] == '-') && i > start &&
                        (src[i - 1] == 'e' || src[i - 1] == 'E' ||
                         src[i - 1] == 'p' || src[i - 1] == 'P'))))
        i++;
      out.push_back({TokKind::kNumber, src.substr(start, i - start), line, start});
      continue;
    }
    // Punctuation. Multi-character operators that matter downstream are
    // kept whole so "&&" is one decision point, not two '&'.
    static const char *kTwoChar[] = {"&&", "||", "->", "<<", ">>", "==", "!=",
                                     "<=", ">=", "+=", "-=", "*=", "/=", "%=",
                                     "&=", "|=", "^=", "++", "--"};
    if (i + 2 < n && src.compare(i, 3, "...") == 0) {
      out.push_back({TokKind::kPunct, "...", line, i});
      i += 3;
      continue;
    }
    bool matched = false;
    for (const char *op : kTwoChar) {
      if (i + 1 < n && src[i] == op[0] && src[i + 1] == op[1]) {
        out.push_back({TokKind::kPunct, op, line, i});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    out.push_back({TokKind::kPunct, std::string(1, c), line, i});
    i++;
  }
  return out;
}

// --- Cyclomatic complexity -------------------------------------------------

// McCabe over token text: 1 + if/for/while/case keywords and &&/||/?
// operators. Strings and comments were removed by the tokenizer.
inline int ComputeCyclomaticComplexity(const std::string &body) {
  int decisions = 0;
  for (const Token &t : TokenizeC(body)) {
    if (t.kind == TokKind::kIdent) {
      if (t.text == "if" || t.text == "for" || t.text == "while" ||
          t.text == "case")
        decisions++;
    } else if (t.kind == TokKind::kPunct) {
      if (t.text == "&&" || t.text == "||" || t.text == "?") decisions++;
    }
  }
  return 1 + decisions;
}

// --- Extraction -------------------------------------------------------------

namespace inventory_detail {

inline const std::set<std::string> &StorageSpecifiers() {
  static const std::set<std::string> kSet = {"static", "extern", "inline",
                                             "_Noreturn", "register"};
  return kSet;
}

inline const std::set<std::string> &NonCalleeKeywords() {
  static const std::set<std::string> kSet = {
      "if", "for", "while", "switch", "return", "sizeof",
      "do", "else", "case",  "defined"};
  return kSet;
}

inline std::string JoinTypeTokens(const std::vector<Token> &toks, size_t begin,
                                  size_t end) {
  std::string out;
  for (size_t i = begin; i < end; i++) {
    if (!out.empty()) out += ' ';
    out += toks[i].text;
  }
  return out;
}

// Parses one parameter's token slice into (name, type) plus shape flags.
inline Param ParseParamTokens(const std::vector<Token> &toks, size_t begin,
                              size_t end, bool *is_fn_ptr) {
  Param p;
  *is_fn_ptr = false;
  for (size_t i = begin; i < end; i++) {
    if (toks[i].kind == TokKind::kPunct && toks[i].text == "(") {
      *is_fn_ptr = true;
      break;
    }
  }
  if (*is_fn_ptr) {
    // `ret (*name)(args)`: the declared name is the last identifier in the
    // first parenthesized group.
    size_t name_idx = end;
    int depth = 0;
    for (size_t i = begin; i < end; i++) {
      if (toks[i].kind == TokKind::kPunct && toks[i].text == "(") {
        depth++;
      } else if (toks[i].kind == TokKind::kPunct && toks[i].text == ")") {
        if (--depth == 0) break;
      } else if (depth == 1 && toks[i].kind == TokKind::kIdent) {
        name_idx = i;
      }
    }
    std::string type;
    for (size_t i = begin; i < end; i++) {
      if (i == name_idx) continue;
      if (!type.empty()) type += ' ';
      type += toks[i].text;
    }
    if (name_idx < end) p.name = toks[name_idx].text;
    p.type = type;
    return p;
  }
  // Ordinary parameter: the name is the last identifier outside brackets;
  // everything else is the type.
  size_t name_idx = end;
  int bracket = 0;
  for (size_t i = begin; i < end; i++) {
    if (toks[i].kind == TokKind::kPunct && toks[i].text == "[") bracket++;
    if (toks[i].kind == TokKind::kPunct && toks[i].text == "]") bracket--;
    if (bracket == 0 && toks[i].kind == TokKind::kIdent) name_idx = i;
  }
  // A single token is a bare type (e.g. `int`), not a name.
  if (end - begin == 1) name_idx = end;
  std::string type;
  for (size_t i = begin; i < end; i++) {
    if (i == name_idx) continue;
    if (!type.empty()) type += ' ';
    type += toks[i].text;
  }
  if (name_idx < end) p.name = toks[name_idx].text;
  p.type = type;
  return p;
}

inline int CountDistinctCallees(const std::vector<Token> &toks, size_t begin,
                                size_t end) {
  std::set<std::string> callees;
  for (size_t i = begin; i + 1 < end; i++) {
    if (toks[i].kind != TokKind::kIdent) continue;
    if (toks[i + 1].kind != TokKind::kPunct || toks[i + 1].text != "(") continue;
    if (NonCalleeKeywords().count(toks[i].text)) continue;
    callees.insert(toks[i].text);
  }
  return static_cast<int>(callees.size());
}

}  // namespace inventory_detail

// Extracts every top-level function definition. Declarations, initializer
// braces and type definitions are skipped; macros are not expanded.
// Throws UnparsableSource on unbalanced braces outside strings/comments.
inline std::vector<FunctionRecord> ExtractFunctions(const SourceUnit &unit) {
  using namespace inventory_detail;
  const auto toks = TokenizeC(unit.content);

  // Brace balance gate: extraction needs well-formed nesting.
  {
    int depth = 0;
    for (const Token &t : toks) {
      if (t.kind != TokKind::kPunct) continue;
      if (t.text == "{") depth++;
      if (t.text == "}" && --depth < 0)
        throw UnparsableSource(unit.path.string() + ": unbalanced '}'");
    }
    if (depth != 0)
      throw UnparsableSource(unit.path.string() + ": unbalanced '{'");
  }

  std::vector<FunctionRecord> out;
  size_t stmt_begin = 0;  // first token of the current top-level declaration
  size_t i = 0;
  int depth = 0;
  while (i < toks.size()) {
    const Token &t = toks[i];
    if (t.kind == TokKind::kPunct && t.text == "{") {
      // Not a function header: skip the whole braced group.
      int d = 0;
      while (i < toks.size()) {
        if (toks[i].kind == TokKind::kPunct && toks[i].text == "{") d++;
        if (toks[i].kind == TokKind::kPunct && toks[i].text == "}" && --d == 0)
          break;
        i++;
      }
      i++;
      continue;
    }
    if (t.kind == TokKind::kPunct && t.text == ";") {
      stmt_begin = i + 1;
      i++;
      continue;
    }
    if (depth == 0 && t.kind == TokKind::kPunct && t.text == "(" && i > 0 &&
        toks[i - 1].kind == TokKind::kIdent &&
        !NonCalleeKeywords().count(toks[i - 1].text)) {
      const size_t name_idx = i - 1;
      // Find the matching ')'.
      size_t j = i;
      int pd = 0;
      while (j < toks.size()) {
        if (toks[j].kind == TokKind::kPunct && toks[j].text == "(") pd++;
        if (toks[j].kind == TokKind::kPunct && toks[j].text == ")" && --pd == 0)
          break;
        j++;
      }
      if (j >= toks.size()) throw UnparsableSource(unit.path.string() +
                                                   ": unbalanced '('");
      const size_t close_paren = j;
      const size_t after = close_paren + 1;
      if (after < toks.size() && toks[after].kind == TokKind::kPunct &&
          toks[after].text == "{") {
        // Function definition. Find the matching closing brace.
        size_t k = after;
        int bd = 0;
        while (k < toks.size()) {
          if (toks[k].kind == TokKind::kPunct && toks[k].text == "{") bd++;
          if (toks[k].kind == TokKind::kPunct && toks[k].text == "}" &&
              --bd == 0)
            break;
          k++;
        }
        const size_t close_brace = k;

        FunctionRecord rec;
        rec.name = toks[name_idx].text;
        rec.source_path = unit.path.string();

        std::vector<Token> ret_toks;
        for (size_t r = stmt_begin; r < name_idx; r++) {
          if (toks[r].kind == TokKind::kIdent &&
              StorageSpecifiers().count(toks[r].text))
            continue;
          ret_toks.push_back(toks[r]);
        }
        rec.return_type = JoinTypeTokens(ret_toks, 0, ret_toks.size());

        // Parameters: split on top-level commas inside the parens.
        size_t p_begin = i + 1;
        int pdepth = 0;
        std::vector<std::pair<size_t, size_t>> param_slices;
        for (size_t p = i + 1; p <= close_paren; p++) {
          if (toks[p].kind == TokKind::kPunct && toks[p].text == "(") pdepth++;
          const bool at_end = (p == close_paren && pdepth == 0);
          if (toks[p].kind == TokKind::kPunct && toks[p].text == ")") {
            if (pdepth == 0 && p == close_paren) {
              if (p > p_begin) param_slices.emplace_back(p_begin, p);
              break;
            }
            pdepth--;
          }
          if (!at_end && pdepth == 0 && toks[p].kind == TokKind::kPunct &&
              toks[p].text == ",") {
            param_slices.emplace_back(p_begin, p);
            p_begin = p + 1;
          }
        }
        for (auto [pb, pe] : param_slices) {
          if (pe - pb == 1 && toks[pb].kind == TokKind::kIdent &&
              toks[pb].text == "void")
            continue;
          if (pe - pb == 1 && toks[pb].text == "...") {
            rec.is_variadic = true;
            continue;
          }
          bool fn_ptr = false;
          rec.params.push_back(ParseParamTokens(toks, pb, pe, &fn_ptr));
          if (fn_ptr) rec.has_function_pointer_param = true;
        }

        const Token &first =
            ret_toks.empty() ? toks[name_idx] : ret_toks.front();
        rec.line_start = first.line;
        rec.line_end = toks[close_brace].line;
        rec.body = unit.content.substr(
            first.offset, toks[close_brace].offset + 1 - first.offset);
        rec.cyclomatic_complexity = ComputeCyclomaticComplexity(rec.body);
        rec.call_count = CountDistinctCallees(toks, after + 1, close_brace);
        out.push_back(std::move(rec));

        i = close_brace + 1;
        stmt_begin = i;
        continue;
      }
      i = after;
      continue;
    }
    i++;
  }
  return out;
}

// --- Signature specs ---------------------------------------------------------

inline SignatureSpec LoadSignatureSpec(const std::string &document,
                                       bool hint_yaml) {
  nlohmann::json doc;
  try {
    doc = ParseStructuredDocument(document, hint_yaml);
  } catch (const ConfigError &e) {
    throw MalformedSpec(e.what());
  }
  if (!doc.is_object()) throw MalformedSpec("spec document is not a mapping");
  if (!doc.contains("function_name") || !doc["function_name"].is_string() ||
      doc["function_name"].get<std::string>().empty())
    throw MalformedSpec("missing function_name");
  if (!doc.contains("return_type") || !doc["return_type"].is_string())
    throw MalformedSpec("missing return_type");
  SignatureSpec spec;
  spec.function_name = doc["function_name"].get<std::string>();
  spec.return_type = doc["return_type"].get<std::string>();
  if (doc.contains("params")) {
    if (!doc["params"].is_array()) throw MalformedSpec("params is not a list");
    for (const auto &p : doc["params"]) {
      Param param;
      if (p.is_object()) {
        param.name = p.value("name", "");
        param.type = p.value("type", "");
      } else if (p.is_array() && p.size() == 2) {
        param.name = p[0].get<std::string>();
        param.type = p[1].get<std::string>();
      } else {
        throw MalformedSpec("param entry is neither {name,type} nor a pair");
      }
      spec.params.push_back(std::move(param));
    }
  }
  spec.source_file = doc.value("source_file", "");
  if (doc.contains("cwe_hints")) {
    if (!doc["cwe_hints"].is_array())
      throw MalformedSpec("cwe_hints is not a list");
    for (const auto &h : doc["cwe_hints"])
      spec.cwe_hints.push_back(h.get<std::string>());
  }
  return spec;
}

inline SignatureSpec LoadSignatureSpecFile(const std::filesystem::path &path) {
  return LoadSignatureSpec(ReadFile(path), PathLooksYaml(path));
}

// A spec-backed record has no body; complexity floors at the McCabe base.
inline FunctionRecord SpecToRecord(const SignatureSpec &spec) {
  FunctionRecord rec;
  rec.name = spec.function_name;
  rec.return_type = spec.return_type;
  rec.params = spec.params;
  rec.source_path = spec.source_file;
  rec.cyclomatic_complexity = 1;
  return rec;
}

// --- Fuzz-interface matching --------------------------------------------------

inline const std::map<std::string, std::string> &DefaultTypedefMap() {
  static const std::map<std::string, std::string> kMap = {
      {"uint8_t", "unsigned char"}, {"size_t", "unsigned long"}};
  return kMap;
}

// Canonical form used for type comparison: const stripped, typedef aliases
// replaced, single-space joined.
inline std::string NormalizeTypeText(
    const std::string &type,
    const std::map<std::string, std::string> &typedef_map) {
  std::string out;
  for (const Token &t : TokenizeC(type)) {
    std::string text = t.text;
    if (t.kind == TokKind::kIdent) {
      if (text == "const") continue;
      auto it = typedef_map.find(text);
      if (it != typedef_map.end()) text = it->second;
    }
    if (!out.empty()) out += ' ';
    out += text;
  }
  return out;
}

// True iff the signature is type-compatible with the fuzzing entry point:
// exactly (byte pointer, size integer).
inline bool MatchFuzzInterfaceTypes(
    const FunctionRecord &record,
    const std::map<std::string, std::string> &typedef_map = DefaultTypedefMap()) {
  if (record.params.size() != 2) return false;
  const std::string first = NormalizeTypeText(record.params[0].type, typedef_map);
  const std::string second = NormalizeTypeText(record.params[1].type, typedef_map);
  static const std::set<std::string> kBytePtr = {
      "char *", "unsigned char *", "signed char *"};
  static const std::set<std::string> kSizeInt = {
      "int",           "unsigned",       "unsigned int",
      "long",          "unsigned long",  "long long",
      "unsigned long long", "short",     "unsigned short"};
  return kBytePtr.count(first) > 0 && kSizeInt.count(second) > 0;
}

// Renders a C signature: pointer types bind the '*' to the declarator.
inline std::string RenderSignature(const FunctionRecord &record) {
  auto join = [](const std::string &type, const std::string &name) {
    if (name.empty()) return type;
    if (!type.empty() && type.back() == '*') return type + name;
    return type + " " + name;
  };
  std::string out = join(record.return_type, record.name);
  out += "(";
  if (record.params.empty() && !record.is_variadic) {
    out += "void";
  } else {
    for (size_t i = 0; i < record.params.size(); i++) {
      if (i) out += ", ";
      out += join(record.params[i].type, record.params[i].name);
    }
    if (record.is_variadic) out += ", ...";
  }
  out += ")";
  return out;
}

// --- Serialization -------------------------------------------------------------

inline nlohmann::ordered_json ParamToJson(const Param &p) {
  return nlohmann::ordered_json{{"name", p.name}, {"type", p.type}};
}

inline nlohmann::ordered_json RecordToJson(const FunctionRecord &r) {
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (const auto &p : r.params) params.push_back(ParamToJson(p));
  return nlohmann::ordered_json{
      {"name", r.name},
      {"return_type", r.return_type},
      {"params", params},
      {"source_path", r.source_path},
      {"line_start", r.line_start},
      {"line_end", r.line_end},
      {"cyclomatic_complexity", r.cyclomatic_complexity},
      {"call_count", r.call_count},
      {"is_variadic", r.is_variadic},
      {"has_function_pointer_param", r.has_function_pointer_param},
      {"body", r.body}};
}

inline FunctionRecord RecordFromJson(const nlohmann::json &j) {
  FunctionRecord r;
  r.name = j.at("name").get<std::string>();
  r.return_type = j.at("return_type").get<std::string>();
  for (const auto &p : j.at("params"))
    r.params.push_back({p.at("name").get<std::string>(),
                        p.at("type").get<std::string>()});
  r.source_path = j.value("source_path", "");
  r.line_start = j.value("line_start", 1);
  r.line_end = j.value("line_end", 1);
  r.cyclomatic_complexity = j.value("cyclomatic_complexity", 1);
  r.call_count = j.value("call_count", 0);
  r.is_variadic = j.value("is_variadic", false);
  r.has_function_pointer_param = j.value("has_function_pointer_param", false);
  r.body = j.value("body", "");
  return r;
}

}  // namespace fuzzoracle

#endif  // FUZZORACLE_INVENTORY_H_
