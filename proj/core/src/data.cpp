#include "countlab/data.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace countlab {

const char* Vocab::symbol(int id) {
  if (id < 0 || id >= tok::kVocabSize) throw std::out_of_range("token id out of range");
  return symbols[static_cast<size_t>(id)];
}

std::optional<int> Vocab::id(const std::string& symbol) {
  for (int i = 0; i < tok::kVocabSize; ++i)
    if (symbol == symbols[static_cast<size_t>(i)]) return i;
  return std::nullopt;
}

SplitSpec default_train_spec(uint64_t seed) {
  return {"train", 7000, {0, 100}, {0, 100}, seed};
}
SplitSpec default_val_spec(uint64_t seed) {
  return {"val", 1500, {101, 150}, {0, 150}, seed};
}
SplitSpec default_test_spec(uint64_t seed) {
  return {"test", 1500, {151, 200}, {0, 200}, seed};
}

int label_for(const CountTriple& counts) {
  return counts.n1 > counts.n0 ? tok::kFour : tok::kFive;
}

Sentence generate_sentence(const SplitSpec& spec, size_t index) {
  if (spec.n01.lo > spec.n01.hi || spec.n2.lo > spec.n2.hi)
    throw std::invalid_argument("generate_sentence: empty interval in split spec");
  Rng rng = Rng::derive(spec.seed, index);
  Sentence s;
  s.counts.n0 = rng.uniform_int(spec.n01.lo, spec.n01.hi);
  s.counts.n1 = rng.uniform_int(spec.n01.lo, spec.n01.hi);
  s.counts.n2 = rng.uniform_int(spec.n2.lo, spec.n2.hi);
  s.answer = label_for(s.counts);

  std::vector<int> interior;
  interior.reserve(static_cast<size_t>(s.counts.n0 + s.counts.n1 + s.counts.n2));
  interior.insert(interior.end(), static_cast<size_t>(s.counts.n0), tok::kZero);
  interior.insert(interior.end(), static_cast<size_t>(s.counts.n1), tok::kOne);
  interior.insert(interior.end(), static_cast<size_t>(s.counts.n2), tok::kTwo);
  rng.shuffle(interior);

  s.tokens.reserve(interior.size() + 4);
  s.tokens.push_back(tok::kBos);
  s.tokens.insert(s.tokens.end(), interior.begin(), interior.end());
  s.tokens.push_back(tok::kEq);
  s.tokens.push_back(s.answer);
  s.tokens.push_back(tok::kEos);
  return s;
}

std::vector<Sentence> generate_split(const SplitSpec& spec) {
  std::vector<Sentence> out;
  out.reserve(spec.count);
  for (size_t i = 0; i < spec.count; ++i) out.push_back(generate_sentence(spec, i));
  return out;
}

ValidationResult validate_sentence(const std::vector<int>& tokens) {
  ValidationResult r;
  if (tokens.size() < 4) {
    r.reason = "bad frame: too short";
    return r;
  }
  if (tokens.front() != tok::kBos) {
    r.reason = "bad frame: missing [BOS]";
    return r;
  }
  if (tokens.back() != tok::kEos) {
    r.reason = "bad frame: missing [EOS]";
    return r;
  }
  const int answer = tokens[tokens.size() - 2];
  if (answer != tok::kFour && answer != tok::kFive) {
    r.reason = "bad answer: expected '4' or '5' before [EOS]";
    return r;
  }
  if (tokens[tokens.size() - 3] != tok::kEq) {
    r.reason = "bad frame: missing '='";
    return r;
  }
  for (size_t i = 1; i + 3 < tokens.size(); ++i) {
    const int t = tokens[i];
    if (t != tok::kZero && t != tok::kOne && t != tok::kTwo) {
      r.reason = "bad interior symbol at position " + std::to_string(i);
      return r;
    }
    if (t == tok::kZero) ++r.counts.n0;
    if (t == tok::kOne) ++r.counts.n1;
    if (t == tok::kTwo) ++r.counts.n2;
  }
  r.label = label_for(r.counts);
  if (answer != r.label) {
    r.reason = std::string("bad answer: answer should be '") +
               Vocab::symbol(r.label) + "'";
    return r;
  }
  r.valid = true;
  return r;
}

std::string sentence_to_text(const Sentence& s) {
  std::string out;
  for (size_t i = 0; i < s.tokens.size(); ++i) {
    if (i) out += ' ';
    out += Vocab::symbol(s.tokens[i]);
  }
  return out;
}

void write_dataset_text(const std::vector<Sentence>& sentences, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  for (const Sentence& s : sentences) f << sentence_to_text(s) << '\n';
}

std::vector<Sentence> read_dataset_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<Sentence> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    Sentence s;
    std::istringstream iss(line);
    std::string word;
    while (iss >> word) {
      auto id = Vocab::id(word);
      if (!id) throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                        ": unknown token '" + word + "'");
      s.tokens.push_back(*id);
    }
    ValidationResult v = validate_sentence(s.tokens);
    if (!v.valid)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + v.reason);
    s.answer = v.label;
    s.counts = v.counts;
    out.push_back(std::move(s));
  }
  return out;
}

void write_counts_csv(const std::vector<Sentence>& sentences, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "n0,n1,n2,answer\n";
  for (const Sentence& s : sentences)
    f << s.counts.n0 << ',' << s.counts.n1 << ',' << s.counts.n2 << ','
      << Vocab::symbol(s.answer) << '\n';
}

uint64_t dataset_digest(const std::vector<Sentence>& sentences) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const char* p, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(p[i]);
      h *= 0x100000001b3ULL;
    }
  };
  for (const Sentence& s : sentences) {
    std::string line = sentence_to_text(s);
    feed(line.data(), line.size());
    feed("\n", 1);
  }
  return h;
}

Dataset generate_default_dataset(uint64_t seed) {
  Dataset d;
  d.train = generate_split(default_train_spec(seed));
  d.val = generate_split(default_val_spec(seed + 1));
  d.test = generate_split(default_test_spec(seed + 2));
  return d;
}

}  // namespace countlab
