// Open a document against a schema, ask for the menu at a cursor, apply an item.

#include <iostream>

#include "projedit/menu.hpp"

using namespace projedit;

int main() {
  auto schema = loadSchema(R"({
    "type": "object",
    "properties": {
      "mark": {"enum": ["bar", "line", "point"]},
      "width": {"type": "number", "minimum": 0},
      "title": {"type": "string"}
    }
  })");
  std::string text = R"({
  // a chart
  "mark": "bar"
})";
  auto tree = parse(text);

  std::size_t cursor = text.find("\"bar\"") + 1;
  Menu menu = menuFor(tree, schema, builtinRegistry(), cursor);
  std::cout << "menu at " << menu.anchorPath.toString() << ":\n";
  for (const auto& item : menu.items) std::cout << "  [" << menuGroupName(item.group) << "] " << item.label << '\n';

  for (const auto& item : menu.items)
    if (item.label == "line") {
      text = applyAction(tree, *item.action);
      break;
    }
  tree = parse(text);

  // add a missing property from the object's menu
  Menu objectMenu = menuFor(tree, schema, builtinRegistry(), text.find("//"));
  for (const auto& item : objectMenu.items)
    if (item.label == "width") text = applyAction(tree, *item.action);

  std::cout << "\nresult:\n" << text << '\n';
  for (const auto& d : validate(parse(text), *schema)) std::cout << "diagnostic: " << d.message << '\n';
}
