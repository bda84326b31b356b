// Register a custom view and list where it anchors.

#include <iostream>

#include "projedit/projection.hpp"

using namespace projedit;

int main() {
  std::string text = R"({"start": "2024-01-05", "end": "2024-02-01", "note": "not a date", "tags": ["2023-12-24"]})";
  auto tree = parse(text);

  ViewSpec dates;
  dates.id = "datePicker";
  dates.placement = Placement::Replace;
  dates.query = Query::regex({R"(^"\d{4}-\d{2}-\d{2}"$)"});
  dates.widget = {"custom", "datePicker", Json::object()};
  dates.payload = [](const ViewContext& ctx) {
    std::string raw(ctx.tree.valueText(ctx.node));
    return Json{{"iso", raw.substr(1, raw.size() - 2)}};
  };

  // views can also come from JSON, as a client would send them
  ViewSpec keys = ViewSpec::fromJson(Json::parse(R"({
    "id": "keyBadge", "placement": "inline-prefix", "query": {"syntaxNode": ["PropertyName"]}
  })"));

  ViewRegistry registry = registerView(registerView(builtinRegistry({"colorChip", "colorPicker"}), dates), keys);
  AnchorResult result = resolveAnchors(tree, nullptr, registry);
  for (const auto& a : result.anchors)
    std::cout << a.viewId << " @ " << a.keyPath.toString() << " " << placementName(a.placement) << " " << a.toJson()["payload"].dump() << '\n';
}
