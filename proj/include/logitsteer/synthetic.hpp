// Copyright 2026 The logitsteer Authors.
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

// Deterministic toy sentiment data for desk-scale steering experiments.
//
// A first-order chain over synthetic filler words. Every filler has a few
// filler successors and, per polarity, a few sentiment-word successors drawn
// from a 50-word lexicon. A positive document follows the chain and, after a
// filler, switches to one of that filler's positive successors with
// probability `sentiment_rate` (and to a negative one with the smaller
// `cross_rate`); negative documents mirror this. Filler f always lists f+1 as
// a successor so every filler is reachable. Prompts are short filler-only walks, so their sentiment comes only
// from the continuation.

#ifndef LOGITSTEER_SYNTHETIC_HPP_
#define LOGITSTEER_SYNTHETIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "logitsteer/error.hpp"
#include "logitsteer/random.hpp"

namespace logitsteer {

inline const std::vector<std::string>& positive_sentiment_words() {
  static const std::vector<std::string> words{
      "good",     "great",     "excellent", "wonderful", "amazing",  "happy",    "love",
      "lovely",   "beautiful", "brilliant", "delightful", "fantastic", "superb",  "joyful",
      "pleasant", "cheerful",  "awesome",   "perfect",   "charming", "glad",     "nice",
      "kind",     "gentle",    "bright",    "warm",      "calm",     "fresh",    "graceful",
      "elegant",  "thrilled",  "grateful",  "hopeful",   "proud",    "vibrant",  "radiant",
      "splendid", "marvelous", "terrific",  "fabulous",  "stellar",  "sunny",    "sweet",
      "friendly", "generous",  "inspiring", "uplifting", "peaceful", "gorgeous", "admirable",
      "serene"};
  return words;
}

inline const std::vector<std::string>& negative_sentiment_words() {
  static const std::vector<std::string> words{
      "bad",     "terrible", "awful",    "horrible",   "sad",     "hate",     "ugly",
      "dreadful", "miserable", "poor",   "nasty",      "gloomy",  "angry",    "bitter",
      "cruel",   "dull",     "boring",   "painful",    "rotten",  "worst",    "hostile",
      "grim",    "toxic",    "harsh",    "disgusting", "annoying", "tragic",  "lousy",
      "pathetic", "wretched", "vile",    "sour",       "broken",  "hopeless", "fearful",
      "furious", "bleak",    "dismal",   "gross",      "filthy",  "shameful", "stupid",
      "rude",    "sick",     "nervous",  "upset",      "lonely",  "worried",  "tense",
      "grumpy"};
  return words;
}

struct SyntheticOptions {
  std::uint64_t seed = 7;
  std::size_t num_fillers = 450;
  std::size_t docs_per_class = 2400;
  std::size_t eval_docs = 1000;
  std::size_t min_doc_len = 10;
  std::size_t max_doc_len = 20;
  std::size_t filler_successors = 4;
  std::size_t sentiment_successors = 2;  // per polarity, per filler
  double sentiment_rate = 0.25;
  // Chance of an opposite-polarity word where no same-polarity word was
  // chosen. Real sentiment corpora are noisy in this way.
  double cross_rate = 0.05;
  std::size_t num_prompts = 50;
  std::size_t min_prompt_len = 4;
  std::size_t max_prompt_len = 8;
};

struct SyntheticCorpus {
  std::vector<std::string> positive_lexicon;
  std::vector<std::string> negative_lexicon;
  std::vector<std::string> fillers;
  std::vector<std::string> positive_docs;
  std::vector<std::string> negative_docs;
  std::vector<std::string> union_docs;  // positive and negative interleaved
  std::vector<std::string> eval_docs;   // held out, same mixture as union_docs
  std::vector<std::string> prompts;
};

namespace detail {

class SyntheticChain {
 public:
  SyntheticChain(const SyntheticOptions& options, RandomSource& rng,
                 const std::vector<std::string>& fillers)
      : options_(options), fillers_(fillers) {
    const std::size_t n = fillers.size();
    // Zipf(1) weights over filler ranks keep the unigram distribution peaked.
    std::vector<double> cdf(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      total += 1.0 / static_cast<double>(r + 1);
      cdf[r] = total;
    }
    auto zipf = [&] {
      const double u = rng.uniform() * total;
      return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    };
    auto pick_distinct = [&](std::size_t count, std::size_t universe, auto&& draw) {
      std::vector<std::size_t> out;
      while (out.size() < std::min(count, universe)) {
        const std::size_t candidate = std::min(draw(), universe - 1);
        if (std::find(out.begin(), out.end(), candidate) == out.end()) out.push_back(candidate);
      }
      return out;
    };
    const std::size_t lexicon_size = positive_sentiment_words().size();
    auto uniform_lexicon = [&] {
      return static_cast<std::size_t>(rng.uniform() * static_cast<double>(lexicon_size));
    };
    filler_next_.resize(n);
    positive_next_.resize(n);
    negative_next_.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
      filler_next_[f] = {(f + 1) % n};
      while (filler_next_[f].size() < std::min(options.filler_successors, n)) {
        const std::size_t candidate = zipf();
        if (std::find(filler_next_[f].begin(), filler_next_[f].end(), candidate) ==
            filler_next_[f].end()) {
          filler_next_[f].push_back(std::min(candidate, n - 1));
        }
      }
      positive_next_[f] = pick_distinct(options.sentiment_successors, lexicon_size, uniform_lexicon);
      negative_next_[f] = pick_distinct(options.sentiment_successors, lexicon_size, uniform_lexicon);
    }
    for (std::size_t s = 0; s < lexicon_size; ++s) {
      sentiment_next_.push_back(pick_distinct(options.filler_successors, n, zipf));
    }
    starts_ = pick_distinct(std::min<std::size_t>(n, 40), n, zipf);
  }

  // polarity: +1 positive, -1 negative, 0 filler only.
  std::vector<std::string> walk(RandomSource& rng, std::size_t length, int polarity) const {
    auto pick = [&](const std::vector<std::size_t>& options) {
      return options[static_cast<std::size_t>(rng.uniform() * static_cast<double>(options.size()))];
    };
    std::vector<std::string> words;
    std::size_t filler = pick(starts_);
    words.push_back(fillers_[filler]);
    while (words.size() < length) {
      int emit = 0;
      if (polarity != 0) {
        const double u = rng.uniform();
        if (u < options_.sentiment_rate) {
          emit = polarity;
        } else if (u < options_.sentiment_rate + options_.cross_rate) {
          emit = -polarity;
        }
      }
      if (emit != 0) {
        const std::size_t s = pick(emit > 0 ? positive_next_[filler] : negative_next_[filler]);
        words.push_back(emit > 0 ? positive_sentiment_words()[s] : negative_sentiment_words()[s]);
        if (words.size() >= length) break;
        filler = pick(sentiment_next_[s]);
      } else {
        filler = pick(filler_next_[filler]);
      }
      words.push_back(fillers_[filler]);
    }
    return words;
  }

 private:
  const SyntheticOptions& options_;
  const std::vector<std::string>& fillers_;
  std::vector<std::vector<std::size_t>> filler_next_;
  std::vector<std::vector<std::size_t>> positive_next_;
  std::vector<std::vector<std::size_t>> negative_next_;
  std::vector<std::vector<std::size_t>> sentiment_next_;
  std::vector<std::size_t> starts_;
};

inline std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace detail

inline SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options = {}) {
  if (options.num_fillers < options.filler_successors || options.num_fillers == 0) {
    throw Error("too few filler words");
  }
  if (options.min_doc_len < 1 || options.min_doc_len > options.max_doc_len ||
      options.min_prompt_len < 1 || options.min_prompt_len > options.max_prompt_len) {
    throw Error("invalid length range");
  }
  SyntheticCorpus corpus;
  corpus.positive_lexicon = positive_sentiment_words();
  corpus.negative_lexicon = negative_sentiment_words();

  RandomSource rng(options.seed);
  std::set<std::string> taken(corpus.positive_lexicon.begin(), corpus.positive_lexicon.end());
  taken.insert(corpus.negative_lexicon.begin(), corpus.negative_lexicon.end());
  static constexpr char kConsonants[] = "bdfgklmnprstvz";
  static constexpr char kVowels[] = "aeiou";
  while (corpus.fillers.size() < options.num_fillers) {
    const std::size_t syllables = 2 + static_cast<std::size_t>(rng.uniform() * 2.0);
    std::string word;
    for (std::size_t s = 0; s < syllables; ++s) {
      word.push_back(kConsonants[static_cast<std::size_t>(rng.uniform() * 14.0)]);
      word.push_back(kVowels[static_cast<std::size_t>(rng.uniform() * 5.0)]);
    }
    if (taken.insert(word).second) corpus.fillers.push_back(word);
  }

  const detail::SyntheticChain chain(options, rng, corpus.fillers);
  auto length = [&](RandomSource& r, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(r.uniform() * static_cast<double>(hi - lo + 1));
  };
  RandomSource doc_rng(mix64(options.seed + 1));
  for (std::size_t i = 0; i < options.docs_per_class; ++i) {
    corpus.positive_docs.push_back(detail::join_words(
        chain.walk(doc_rng, length(doc_rng, options.min_doc_len, options.max_doc_len), +1)));
    corpus.negative_docs.push_back(detail::join_words(
        chain.walk(doc_rng, length(doc_rng, options.min_doc_len, options.max_doc_len), -1)));
    corpus.union_docs.push_back(corpus.positive_docs.back());
    corpus.union_docs.push_back(corpus.negative_docs.back());
  }
  RandomSource eval_rng(mix64(options.seed + 2));
  for (std::size_t i = 0; i < options.eval_docs; ++i) {
    corpus.eval_docs.push_back(detail::join_words(chain.walk(
        eval_rng, length(eval_rng, options.min_doc_len, options.max_doc_len), i % 2 == 0 ? 1 : -1)));
  }
  RandomSource prompt_rng(mix64(options.seed + 3));
  for (std::size_t i = 0; i < options.num_prompts; ++i) {
    corpus.prompts.push_back(detail::join_words(chain.walk(
        prompt_rng, length(prompt_rng, options.min_prompt_len, options.max_prompt_len), 0)));
  }
  return corpus;
}

}  // namespace logitsteer

#endif  // LOGITSTEER_SYNTHETIC_HPP_
