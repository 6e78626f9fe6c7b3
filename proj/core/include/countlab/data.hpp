#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "countlab/rng.hpp"

namespace countlab {

// The Count01 language: [BOS]{0,1,2}*={4,5}[EOS], where the answer is '4'
// iff the interior holds strictly more '1's than '0's and '5' otherwise
// (ties included). '2' tokens are noise.
namespace tok {
constexpr int kBos = 0;
constexpr int kZero = 1;
constexpr int kOne = 2;
constexpr int kTwo = 3;
constexpr int kEq = 4;
constexpr int kFour = 5;
constexpr int kFive = 6;
constexpr int kEos = 7;
constexpr int kVocabSize = 8;
}  // namespace tok

struct Vocab {
  static constexpr std::array<const char*, tok::kVocabSize> symbols = {
      "[BOS]", "0", "1", "2", "=", "4", "5", "[EOS]"};
  static const char* symbol(int id);
  // Returns nullopt for an unknown symbol.
  static std::optional<int> id(const std::string& symbol);
};

struct CountTriple {
  int64_t n0 = 0;
  int64_t n1 = 0;
  int64_t n2 = 0;

  bool operator==(const CountTriple&) const = default;
};

struct Sentence {
  std::vector<int> tokens;  // full frame: [BOS] interior = answer [EOS]
  int answer = tok::kFive;
  CountTriple counts;
};

struct Interval {
  int64_t lo = 0;
  int64_t hi = 0;  // inclusive
};

struct SplitSpec {
  std::string name;
  size_t count = 0;
  Interval n01;  // shared interval for the '0' and '1' counts
  Interval n2;
  uint64_t seed = 0;
};

// The paper's three splits: 7000/1500/1500 sentences, n0,n1 drawn from
// [0,100]/[101,150]/[151,200] and n2 from [0,100]/[0,150]/[0,200].
SplitSpec default_train_spec(uint64_t seed);
SplitSpec default_val_spec(uint64_t seed);
SplitSpec default_test_spec(uint64_t seed);

// '4' iff n1 > n0, '5' otherwise (ties are '5').
int label_for(const CountTriple& counts);

// Counts drawn uniformly from the spec's inclusive intervals, interior is a
// uniform random permutation of the multiset. Deterministic per (spec.seed,
// index): each sentence gets its own derived generator.
Sentence generate_sentence(const SplitSpec& spec, size_t index);
std::vector<Sentence> generate_split(const SplitSpec& spec);

struct ValidationResult {
  bool valid = false;
  std::string reason;        // empty when valid
  int label = -1;            // recomputed answer token when the frame parses
  CountTriple counts;        // recomputed from the interior
};

// Accepts iff the token sequence matches the frame regex and the answer
// satisfies the counting rule. Always reports the recomputed counts when the
// frame parses.
ValidationResult validate_sentence(const std::vector<int>& tokens);

std::string sentence_to_text(const Sentence& s);

// One sentence per line, space-separated symbols, LF endings.
void write_dataset_text(const std::vector<Sentence>& sentences, const std::string& path);
std::vector<Sentence> read_dataset_text(const std::string& path);

// Companion CSV: header n0,n1,n2,answer, one row per sentence, same order.
void write_counts_csv(const std::vector<Sentence>& sentences, const std::string& path);

// FNV-1a over the canonical text serialization; identical whether a split
// was generated in memory or read back from disk.
uint64_t dataset_digest(const std::vector<Sentence>& sentences);

struct Dataset {
  std::vector<Sentence> train, val, test;
};

Dataset generate_default_dataset(uint64_t seed);

}  // namespace countlab
