// Expand a grammar, edit the output, and push the edit back into the grammar.

#include <iostream>

#include "projedit/edit.hpp"
#include "projedit/tracery.hpp"

using namespace projedit;

int main() {
  std::string doc = R"({
  "origin": ["The #animal# sat on the #thing#."],
  "animal": ["cat", "dog"],
  "thing": ["mat", "#color# rug"],
  "color": ["red", "blue"]
})";
  auto tree = parse(doc);
  auto grammar = tracery::Grammar::fromTree(tree);

  auto trace = tracery::expand(grammar, 3);
  std::cout << "seed 3: " << trace.output << '\n';

  std::string edited = trace.output;
  auto at = edited.find("sat");
  edited.replace(at, 3, "slept");
  std::cout << "edited: " << edited << '\n';

  auto result = tracery::synthesize(grammar, trace, edited);
  std::cout << "sync: " << result.toJson().dump() << '\n';
  if (result.grammarEdit) {
    std::string updated = applyAction(tree, result.grammarEdit->toAction());
    std::cout << "\ngrammar after:\n" << updated << '\n';
    auto again = tracery::expand(tracery::Grammar::fromTree(parse(updated)), 3);
    std::cout << "\nseed 3 again: " << again.output << '\n';
  }
}
