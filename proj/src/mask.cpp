#include "finqa/mask.hpp"

#include <cctype>

namespace finqa {

TokenVocabulary::TokenVocabulary(std::vector<std::string> row_names, std::vector<Rational> numbers,
                                 std::size_t max_steps, const ConstantTable& constants) {
  for (auto& v : numbers) {
    if (find_number(v)) continue;
    VocabToken t{to_decimal_string(v), TokenClass::Number, std::nullopt, v, 0};
    auto id = push(std::move(t));
    input_.push_back(id);
    numbers_.push_back(id);
  }
  for (auto& name : row_names) {
    if (normalize_row_name(name).empty() || find_row(name)) continue;
    auto id = push(VocabToken{std::move(name), TokenClass::Row, std::nullopt, std::nullopt, 0});
    input_.push_back(id);
    rows_.push_back(id);
  }
  for (OpKind op : kAllOps) {
    auto id = push(VocabToken{std::string(op_name(op)), TokenClass::Op, op, std::nullopt, 0});
    special_.push_back(id);
    ops_.push_back(id);
  }
  for (const auto& c : constants.entries()) {
    auto id = push(VocabToken{c.name, TokenClass::Constant, std::nullopt, c.value, 0});
    special_.push_back(id);
    constants_.push_back(id);
  }
  lparen_ = push(VocabToken{"(", TokenClass::LParen, std::nullopt, std::nullopt, 0});
  rparen_ = push(VocabToken{")", TokenClass::RParen, std::nullopt, std::nullopt, 0});
  comma_ = push(VocabToken{",", TokenClass::Comma, std::nullopt, std::nullopt, 0});
  eof_ = push(VocabToken{"EOF", TokenClass::Eof, std::nullopt, std::nullopt, 0});
  special_.insert(special_.end(), {lparen_, rparen_, comma_, eof_});
  for (std::size_t n = 0; n < max_steps; ++n) {
    auto id =
        push(VocabToken{"#" + std::to_string(n), TokenClass::StepMemory, std::nullopt, std::nullopt, n});
    memory_.push_back(id);
  }
}

TokenId TokenVocabulary::push(VocabToken t) {
  tokens_.push_back(std::move(t));
  return tokens_.size() - 1;
}

std::optional<TokenId> TokenVocabulary::find_number(const Rational& v) const {
  for (auto id : numbers_)
    if (*tokens_[id].value == v) return id;
  return std::nullopt;
}

std::optional<TokenId> TokenVocabulary::find_row(const std::string& name) const {
  auto key = normalize_row_name(name);
  for (auto id : rows_)
    if (normalize_row_name(tokens_[id].text) == key) return id;
  return std::nullopt;
}

std::optional<TokenId> TokenVocabulary::find_constant(const std::string& name) const {
  for (auto id : constants_)
    if (tokens_[id].text == name) return id;
  return std::nullopt;
}

TokenVocabulary build_vocabulary(const EvidenceContext& ctx, std::size_t max_steps,
                                 const ConstantTable& constants) {
  std::vector<std::string> rows;
  rows.reserve(ctx.table().rows.size());
  for (const auto& r : ctx.table().rows) rows.push_back(r.name);
  return TokenVocabulary(std::move(rows), ctx.mentioned_numbers(), max_steps, constants);
}

namespace {

using Phase = DecodeState::Phase;

bool numeric_step_available(const DecodeState& s) {
  for (bool b : s.boolean_steps)
    if (!b) return true;
  return false;
}

bool math_op_feasible(const DecodeState& s, const TokenVocabulary& v) {
  return v.has_numeric_literals() || numeric_step_available(s);
}

bool op_feasible(OpKind op, const DecodeState& s, const TokenVocabulary& v) {
  return is_table_op(op) ? v.has_rows() : math_op_feasible(s, v);
}

bool can_start_step(const DecodeState& s, const TokenVocabulary& v) {
  if (s.completed_steps >= v.max_steps()) return false;
  return v.has_rows() || math_op_feasible(s, v);
}

}  // namespace

std::vector<bool> next_token_mask(const DecodeState& state, const TokenVocabulary& vocab) {
  std::vector<bool> mask(vocab.size(), false);
  switch (state.phase) {
    case Phase::ExpectOp:
      if (state.completed_steps >= vocab.max_steps()) break;
      for (OpKind op : kAllOps)
        if (op_feasible(op, state, vocab)) mask[vocab.op_token(op)] = true;
      break;
    case Phase::ExpectLParen:
      mask[vocab.lparen()] = true;
      break;
    case Phase::ExpectArg:
      for (TokenId id = 0; id < vocab.size(); ++id) {
        const auto& t = vocab[id];
        if (is_table_op(*state.current_op)) {
          mask[id] = t.cls == TokenClass::Row;
        } else if (t.cls == TokenClass::Number || t.cls == TokenClass::Constant) {
          mask[id] = true;
        } else if (t.cls == TokenClass::StepMemory) {
          mask[id] = t.step < state.completed_steps && !state.boolean_steps[t.step];
        }
      }
      break;
    case Phase::AfterArg:
      if (state.current_args.size() < op_arity(*state.current_op))
        mask[vocab.comma()] = true;
      else
        mask[vocab.rparen()] = true;
      break;
    case Phase::AfterStep:
      mask[vocab.eof()] = true;
      if (can_start_step(state, vocab)) mask[vocab.comma()] = true;
      break;
    case Phase::Done:
      break;
  }
  return mask;
}

DecodeState advance(const DecodeState& state, TokenId token, const TokenVocabulary& vocab) {
  if (token >= vocab.size() || !next_token_mask(state, vocab)[token]) {
    std::string text = token < vocab.size() ? vocab[token].text : "<" + std::to_string(token) + ">";
    throw IllegalToken("token '" + text + "' is not allowed here");
  }
  DecodeState next = state;
  next.emitted.push_back(token);
  switch (state.phase) {
    case Phase::ExpectOp:
      next.current_op = vocab[token].op;
      next.current_args.clear();
      next.phase = Phase::ExpectLParen;
      break;
    case Phase::ExpectLParen:
      next.phase = Phase::ExpectArg;
      break;
    case Phase::ExpectArg:
      next.current_args.push_back(token);
      next.phase = Phase::AfterArg;
      break;
    case Phase::AfterArg:
      if (token == vocab.comma()) {
        next.phase = Phase::ExpectArg;
      } else {
        next.boolean_steps.push_back(*state.current_op == OpKind::Greater);
        ++next.completed_steps;
        next.current_op.reset();
        next.current_args.clear();
        next.phase = Phase::AfterStep;
      }
      break;
    case Phase::AfterStep:
      next.phase = token == vocab.eof() ? Phase::Done : Phase::ExpectOp;
      break;
    case Phase::Done:
      break;
  }
  return next;
}

std::string detokenize(const std::vector<TokenId>& tokens, const TokenVocabulary& vocab) {
  std::string out;
  for (auto id : tokens) {
    const auto& t = vocab[id];
    switch (t.cls) {
      case TokenClass::Op: out += t.text; break;
      case TokenClass::LParen: out += '('; break;
      case TokenClass::RParen: out += ')'; break;
      case TokenClass::Comma: out += ", "; break;
      case TokenClass::Eof: break;
      case TokenClass::Row: out += render_argument(RowName{t.text}); break;
      default: out += t.text; break;
    }
  }
  return out;
}

std::optional<std::vector<TokenId>> tokenize_program(const Program& p,
                                                     const TokenVocabulary& vocab) {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    if (i) out.push_back(vocab.comma());
    const auto& st = p.steps[i];
    out.push_back(vocab.op_token(st.op));
    out.push_back(vocab.lparen());
    for (std::size_t j = 0; j < st.args.size(); ++j) {
      if (j) out.push_back(vocab.comma());
      std::optional<TokenId> id;
      const auto& a = st.args[j];
      if (const auto* n = std::get_if<NumberLiteral>(&a)) {
        id = vocab.find_number(n->value);
      } else if (const auto* c = std::get_if<Constant>(&a)) {
        id = vocab.find_constant(c->name);
      } else if (const auto* r = std::get_if<RowName>(&a)) {
        id = vocab.find_row(r->name);
      } else if (const auto* s = std::get_if<StepRef>(&a)) {
        if (s->index < vocab.max_steps()) id = vocab.step_token(s->index);
      }
      if (!id) return std::nullopt;
      out.push_back(*id);
    }
    out.push_back(vocab.rparen());
  }
  out.push_back(vocab.eof());
  return out;
}

std::vector<TokenId> tokenize_prefix(std::string_view text, const TokenVocabulary& vocab) {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  bool inside = false;
  bool table_op = false;
  auto fail = [&pos](const std::string& what) {
    throw ParseError(ParseErrorKind::Syntax, pos, what + " at offset " + std::to_string(pos));
  };
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };

  for (skip(); pos < text.size(); skip()) {
    char c = text[pos];
    if (!inside) {
      if (c == ',') {
        out.push_back(vocab.comma());
        ++pos;
        continue;
      }
      std::size_t start = pos;
      while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                   text[pos] == '_' || text[pos] == '-'))
        ++pos;
      auto word = text.substr(start, pos - start);
      if (word == "EOF") {
        out.push_back(vocab.eof());
        continue;
      }
      auto op = op_from_name(word);
      if (!op) fail("expected operation name");
      out.push_back(vocab.op_token(*op));
      table_op = is_table_op(*op);
      skip();
      if (pos >= text.size()) break;
      if (text[pos] != '(') fail("expected '('");
      out.push_back(vocab.lparen());
      ++pos;
      inside = true;
      continue;
    }
    if (c == ',') {
      out.push_back(vocab.comma());
      ++pos;
      continue;
    }
    if (c == ')') {
      out.push_back(vocab.rparen());
      ++pos;
      inside = false;
      continue;
    }
    // Argument text up to a top-level ',' or ')'.
    std::size_t start = pos;
    std::string arg;
    bool quoted = false;
    if (c == '"') {
      quoted = true;
      ++pos;
      while (pos < text.size() && text[pos] != '"') {
        if (text[pos] == '\\' && pos + 1 < text.size()) ++pos;
        arg += text[pos++];
      }
      if (pos >= text.size()) fail("unterminated quoted row name");
      ++pos;
    } else {
      int depth = 0;
      while (pos < text.size()) {
        char d = text[pos];
        if (d == '(') ++depth;
        if (d == ')' && depth-- == 0) break;
        if (d == ',' && depth == 0) break;
        ++pos;
      }
      arg = std::string(text.substr(start, pos - start));
      while (!arg.empty() && std::isspace(static_cast<unsigned char>(arg.back()))) arg.pop_back();
    }
    std::optional<TokenId> id;
    if (quoted || table_op) {
      id = vocab.find_row(arg);
    } else if (!arg.empty() && arg.front() == '#') {
      std::size_t n = 0;
      bool ok = arg.size() > 1 && arg.size() < 10;
      for (std::size_t k = 1; ok && k < arg.size(); ++k) {
        if (!std::isdigit(static_cast<unsigned char>(arg[k]))) ok = false;
        else n = n * 10 + static_cast<std::size_t>(arg[k] - '0');
      }
      if (ok && n < vocab.max_steps()) id = vocab.step_token(n);
    } else if (arg.rfind("const_", 0) == 0) {
      id = vocab.find_constant(arg);
    } else if (auto q = try_parse_quantity(arg)) {
      id = vocab.find_number(q->mantissa);
    } else {
      id = vocab.find_row(arg);
    }
    if (!id) {
      pos = start;
      fail("argument '" + arg + "' is not in the vocabulary");
    }
    out.push_back(*id);
  }
  return out;
}

}  // namespace finqa
