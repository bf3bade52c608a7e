#pragma once

// Grammar-constrained decoding over a program-token vocabulary.
//
// A program is decoded as a flat token stream:
//
//   add ( 5 , const_100 ) , subtract ( #0 , 2 ) EOF
//
// next_token_mask() returns the tokens that keep the prefix completable into a
// program with no validation errors; advance() consumes one token.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "finqa/dsl.hpp"
#include "finqa/evidence.hpp"

namespace finqa {

enum class TokenClass {
  Number,      // input
  Row,         // input
  Op,          // special
  Constant,    // special
  LParen,      // special
  RParen,      // special
  Comma,       // special
  Eof,         // special
  StepMemory,  // #n
};

using TokenId = std::size_t;

struct VocabToken {
  std::string text;
  TokenClass cls;
  std::optional<OpKind> op;       // Op tokens
  std::optional<Rational> value;  // Number and Constant tokens
  std::size_t step = 0;           // StepMemory tokens
};

/// Three disjoint token sources: input tokens taken from the evidence,
/// DSL special tokens, and step memory tokens #0..#(max_steps-1).
class TokenVocabulary {
 public:
  TokenVocabulary(std::vector<std::string> row_names, std::vector<Rational> numbers,
                  std::size_t max_steps, const ConstantTable& constants = ConstantTable::defaults());

  std::size_t size() const { return tokens_.size(); }
  const VocabToken& operator[](TokenId id) const { return tokens_[id]; }
  const std::vector<VocabToken>& tokens() const { return tokens_; }

  const std::vector<TokenId>& input_tokens() const { return input_; }
  const std::vector<TokenId>& special_tokens() const { return special_; }
  const std::vector<TokenId>& step_memory_tokens() const { return memory_; }
  std::size_t max_steps() const { return memory_.size(); }

  TokenId lparen() const { return lparen_; }
  TokenId rparen() const { return rparen_; }
  TokenId comma() const { return comma_; }
  TokenId eof() const { return eof_; }
  TokenId op_token(OpKind op) const { return ops_[static_cast<std::size_t>(op)]; }
  TokenId step_token(std::size_t n) const { return memory_.at(n); }

  std::optional<TokenId> find_number(const Rational& v) const;
  std::optional<TokenId> find_row(const std::string& name) const;
  std::optional<TokenId> find_constant(const std::string& name) const;

  bool has_numeric_literals() const { return !numbers_.empty() || !constants_.empty(); }
  bool has_rows() const { return !rows_.empty(); }

 private:
  TokenId push(VocabToken t);

  std::vector<VocabToken> tokens_;
  std::vector<TokenId> input_, special_, memory_;
  std::vector<TokenId> numbers_, rows_, constants_;
  std::vector<TokenId> ops_;
  TokenId lparen_ = 0, rparen_ = 0, comma_ = 0, eof_ = 0;
};

/// Vocabulary for one evidence context: its numbers and table row names.
TokenVocabulary build_vocabulary(const EvidenceContext& ctx, std::size_t max_steps,
                                 const ConstantTable& constants = ConstantTable::defaults());

/// Position in the decoding automaton plus the partial step.
struct DecodeState {
  enum class Phase {
    ExpectOp,
    ExpectLParen,
    ExpectArg,
    AfterArg,
    AfterStep,
    Done,
  };

  Phase phase = Phase::ExpectOp;
  std::optional<OpKind> current_op;
  std::vector<TokenId> current_args;
  std::size_t completed_steps = 0;
  std::vector<bool> boolean_steps;  // per completed step
  std::vector<TokenId> emitted;

  bool terminal() const { return phase == Phase::Done; }
};

class IllegalToken : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// mask[id] is true when token id may be emitted next.
std::vector<bool> next_token_mask(const DecodeState& state, const TokenVocabulary& vocab);

DecodeState advance(const DecodeState& state, TokenId token, const TokenVocabulary& vocab);

/// Program text for the tokens emitted so far (complete only at terminal states).
std::string detokenize(const std::vector<TokenId>& tokens, const TokenVocabulary& vocab);

/// Token stream for a program (terminated by EOF), or nullopt when some
/// argument has no vocabulary entry.
std::optional<std::vector<TokenId>> tokenize_program(const Program& p,
                                                     const TokenVocabulary& vocab);

/// Tokenizes a possibly incomplete program text ("add(5, ") for replay.
/// Throws ParseError for lexical problems or out-of-vocabulary arguments.
std::vector<TokenId> tokenize_prefix(std::string_view text, const TokenVocabulary& vocab);

}  // namespace finqa
