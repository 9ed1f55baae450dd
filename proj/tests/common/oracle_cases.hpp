// SPDX-License-Identifier: Apache-2.0
// Frozen oracle values shared by the unit and acceptance tests.
#pragma once

#include <string>
#include <vector>

namespace musa::oracle {

// Hand-counted token overlaps after answer normalization.
struct AnswerCase {
  const char* pred;
  const char* gold;
  double em;
  double f1;
  double precision;
  double recall;
};

inline const std::vector<AnswerCase>& answer_cases() {
  static const std::vector<AnswerCase> cases = {
      {"Paris", "paris", 1, 1, 1, 1},
      {"eiffel tower paris", "the eiffel tower", 0, 0.8, 2.0 / 3, 1},
      {"The Eiffel Tower!", "eiffel tower", 1, 1, 1, 1},
      {"london", "paris", 0, 0, 0, 0},
      {"yes", "no", 0, 0, 0, 0},
      {"yes", "yes", 1, 1, 1, 1},
      {"yes it is", "yes", 0, 0, 0, 0},
      {"an apple a day", "apple day", 1, 1, 1, 1},
      {"new york city", "new york", 0, 0.8, 2.0 / 3, 1},
      {"barack obama", "obama", 0, 2.0 / 3, 0.5, 1},
      {"1990", "in 1990", 0, 2.0 / 3, 1, 0.5},
      {"the the cat", "cat cat", 0, 2.0 / 3, 1, 0.5},
      {"red red blue", "red blue blue", 0, 2.0 / 3, 2.0 / 3, 2.0 / 3},
      {"", "paris", 0, 0, 0, 0},
      {"U.S.A.", "usa", 1, 1, 1, 1},
      {"Mount   Everest", "mount everest", 1, 1, 1, 1},
      {"a b c d", "c d e f", 0, 4.0 / 7, 2.0 / 3, 0.5},
      {"john smith jr", "john smith", 0, 0.8, 2.0 / 3, 1},
      {"the 2008 summer olympics", "2008 olympics", 0, 0.8, 2.0 / 3, 1},
      {"noanswer", "noanswer", 1, 1, 1, 1},
      {"no", "no way", 0, 0, 0, 0},
      {"it's complicated", "its complicated", 1, 1, 1, 1},
  };
  return cases;
}

// Three classes. Confusion (gold row -> predicted):
//   A: A=3 B=2      support 5
//   B: A=1 B=1 C=1  support 3
//   C: C=2          support 2
// Per class P/R: A 3/4, 3/5; B 1/3, 1/3; C 2/3, 1.
struct ConfusionCase {
  std::vector<std::string> golds{"A", "A", "A", "A", "A", "B", "B", "B", "C", "C"};
  std::vector<std::string> preds{"A", "A", "A", "B", "B", "B", "C", "A", "C", "C"};
  double accuracy = 0.6;
  double precision = (5 * 0.75 + 3 * (1.0 / 3) + 2 * (2.0 / 3)) / 10;
  double recall = 0.6;
  double f1 = (5 * (2.0 / 3) + 3 * (1.0 / 3) + 2 * 0.8) / 10;
};

}  // namespace musa::oracle
