#include <gtest/gtest.h>

#include "projedit/schema.hpp"
#include "support.hpp"

using namespace projedit;

namespace {

SchemaPtr fixtureSchema(const std::string& name) {
  return loadSchema(testsupport::loadFixture("schemas/" + name + ".schema.json"), name);
}

bool containsEnum(const SchemaSet& set, const std::string& value) {
  for (const auto& e : set.entries)
    if (e.def->enumValues)
      for (const auto& v : *e.def->enumValues)
        if (v == value) return true;
  return false;
}

}  // namespace

TEST(LoadSchema, Examples) {
  auto s = loadSchema(R"({"type":"number"})");
  EXPECT_EQ(s->root().types, std::vector<std::string>{"number"});

  auto r = loadSchema(R"({"$ref":"#/definitions/A","definitions":{"A":{"type":"string"}}})");
  ASSERT_NE(r->root().ref, nullptr);
  EXPECT_EQ(r->root().ref->name, "A");
  auto set = expandSchema(r, r->root());
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.entries[0].name, "A");

  try {
    loadSchema(R"({"$ref":"#/definitions/Missing"})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaRef);
  }
  try {
    loadSchema(R"({"$ref":"http://example.com/other.json"})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedRef);
  }
  EXPECT_THROW(loadSchema("{not json"), Error);
}

TEST(LoadSchema, UnsupportedKeywordsAreRecorded) {
  auto s = loadSchema(R"({"type":"string","pattern":"^a","format":"email"})");
  EXPECT_EQ(s->root().unsupportedKeywords, (std::vector<std::string>{"pattern", "format"}));
}

TEST(LoadSchema, CyclesAreAllowedAndRecorded) {
  auto s = fixtureSchema("cyclic");
  const auto& cyc = s->cyclicDefinitions();
  EXPECT_NE(std::find(cyc.begin(), cyc.end(), "Node"), cyc.end());
  EXPECT_NE(std::find(cyc.begin(), cyc.end(), "Chain"), cyc.end());
  auto v = fixtureSchema("vegalite");
  EXPECT_NE(std::find(v->cyclicDefinitions().begin(), v->cyclicDefinitions().end(), "LogicalComposition"),
            v->cyclicDefinitions().end());
  EXPECT_EQ(std::find(v->cyclicDefinitions().begin(), v->cyclicDefinitions().end(), "Mark"),
            v->cyclicDefinitions().end());
}

TEST(LoadSchema, PercentEncodedRefs) {
  auto s = loadSchema(R"({"$ref":"#/definitions/A%3CB%3E","definitions":{"A<B>":{"type":"null"}}})");
  EXPECT_EQ(s->root().ref->name, "A<B>");
}

TEST(InferSchemaSet, ProduceKindEnum) {
  auto schema = fixtureSchema("produce");
  auto tree = parse(R"({"kind": "fruit"})");
  auto set = inferSchemaSet(tree, schema, KeyPath{Key{"kind"}});
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.entries[0].name, "#/properties/kind");
  EXPECT_EQ(*set.entries[0].def->enumValues, Json::parse(R"(["fruit","vegetable"])"));
  // KeyName steps descend the same way.
  EXPECT_EQ(inferSchemaSet(tree, schema, KeyPath{KeyName{"kind"}}).names(), set.names());
}

TEST(InferSchemaSet, VegaLiteEncodingTypeThroughAllOf) {
  auto schema = fixtureSchema("vegalite");
  auto tree = parse(R"({"mark":"bar","encoding":{"x":{"field":"a","type":"quantitative"}}})");
  auto set = inferSchemaSet(tree, schema, KeyPath{Key{"encoding"}, Key{"x"}, Key{"type"}});
  EXPECT_TRUE(set.hasName("StandardType"));
  EXPECT_TRUE(containsEnum(set, "nominal"));
  EXPECT_TRUE(containsEnum(set, "ordinal"));
  // The merged PositionFieldDef offers properties of both allOf members.
  auto x = inferSchemaSet(tree, schema, KeyPath{Key{"encoding"}, Key{"x"}});
  ASSERT_EQ(x.size(), 1u);
  EXPECT_EQ(x.entries[0].name, "PositionFieldDef");
  EXPECT_TRUE(x.entries[0].def->declares("field"));
  EXPECT_TRUE(x.entries[0].def->declares("stack"));
}

TEST(InferSchemaSet, AdditionalPropertiesOnly) {
  auto schema = loadSchema(R"({"type":"object","additionalProperties":{"type":"number"}})");
  auto set = inferSchemaSet(parse("{}"), schema, KeyPath{Key{"anything"}});
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.entries[0].def->types, std::vector<std::string>{"number"});
}

TEST(InferSchemaSet, BranchesAreNotFilteredByValue) {
  auto schema = fixtureSchema("produce");
  auto tree = parse(R"({"kind":"fruit","packaging":{"weight":2}})");
  auto set = inferSchemaSet(tree, schema, KeyPath{Key{"packaging"}});
  EXPECT_EQ(set.names(), (std::vector<std::string>{"Box", "Bag", "#/properties/packaging/anyOf/2"}));
  ASSERT_EQ(set.entries[1].viaBranch.size(), 1u);
  EXPECT_EQ(set.entries[1].viaBranch[0].combinator, "anyOf");
  EXPECT_EQ(set.entries[1].viaBranch[0].index, 1u);
}

TEST(InferSchemaSet, UnreachablePathIsEmpty) {
  auto schema = fixtureSchema("produce");
  auto tree = parse("{}");
  EXPECT_TRUE(inferSchemaSet(tree, schema, KeyPath{Key{"nope"}}).empty());
  EXPECT_TRUE(inferSchemaSet(tree, schema, KeyPath{Key{"kind"}, Index{0}}).empty());
}

TEST(InferSchemaSet, CyclesTerminate) {
  auto schema = fixtureSchema("cyclic");
  auto tree = parse("{}");
  auto set = inferSchemaSet(tree, schema, KeyPath{Key{"alias"}});
  EXPECT_TRUE(set.hasName("Node"));
  KeyPath deep;
  for (int i = 0; i < 40; ++i) deep = deep.child(Key{"next"});
  EXPECT_EQ(inferSchemaSet(tree, schema, deep).names(), std::vector<std::string>{"Node"});
}

TEST(InferSchemaSet, AllOfConflictsAreWarnings) {
  auto schema = loadSchema(R"({"properties":{"a":{"allOf":[{"const":1},{"const":2}]}}})");
  auto set = inferSchemaSet(parse("{}"), schema, KeyPath{Key{"a"}});
  ASSERT_EQ(set.size(), 1u);
  ASSERT_EQ(set.warnings.size(), 1u);
  EXPECT_NE(set.warnings[0].find("const"), std::string::npos);
}

TEST(InferSchemaSet, DeterministicAndMonotone) {
  auto schema = fixtureSchema("vegalite");
  auto tree = parse("{}");
  std::vector<KeyPath> paths = {
      KeyPath{Key{"config"}, Key{"range"}, Key{"heatmap"}, Key{"scheme"}},
      KeyPath{Key{"transform"}, Index{0}, Key{"filter"}, Key{"not"}, Key{"and"}, Index{2}},
      KeyPath{Key{"mark"}, Key{"color"}},
  };
  for (const auto& p : paths) {
    auto a = inferSchemaSet(tree, schema, p);
    auto b = inferSchemaSet(tree, schema, p);
    EXPECT_EQ(a.names(), b.names());
    EXPECT_FALSE(a.empty()) << p.toString();
    // Refinement from the parent set gives exactly the same entries.
    auto parent = inferSchemaSet(tree, schema, p.parent());
    EXPECT_EQ(stepSchemaSet(schema, parent, p.steps().back()).names(), a.names());
  }
}

TEST(Synthesize, Examples) {
  auto s = loadSchema(R"({"type":"object","required":["mark"],"properties":{"mark":{"enum":["bar","point"]}}})");
  auto r = synthesizeMinimal(s->root(), 16);
  EXPECT_EQ(r.value, Json::parse(R"({"mark":"bar"})"));
  EXPECT_FALSE(r.truncated);

  EXPECT_EQ(synthesizeMinimal(loadSchema(R"({"type":"array"})")->root(), 16).value, Json::array());
  EXPECT_EQ(synthesizeMinimal(loadSchema(R"({"type":"number","minimum":3})")->root(), 16).value, Json(3));
  EXPECT_EQ(synthesizeMinimal(loadSchema(R"({"const":{"k":[1]}})")->root(), 16).value, Json::parse(R"({"k":[1]})"));
  EXPECT_EQ(synthesizeMinimal(loadSchema(R"({"type":"array","minItems":2,"items":{"type":"boolean"}})")->root(), 16).value,
            Json::parse("[false,false]"));
}

TEST(Synthesize, SelfReferenceTruncatesAtDepthLimit) {
  auto s = fixtureSchema("cyclic");
  auto r = synthesizeMinimal(*s->definition("Chain"), 2);
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.value, Json::parse(R"({"next":{"next":null}})"));
  // A pure reference loop with no schema behind it is truncated too.
  auto loop = loadSchema(R"({"$ref":"#/definitions/A","definitions":{"A":{"$ref":"#/definitions/B"},"B":{"$ref":"#/definitions/A"}}})");
  EXPECT_TRUE(synthesizeMinimal(loop->root(), 4).truncated);
  // Branches that loop back are skipped: Alias -> Alias2 -> string.
  auto alias = synthesizeMinimal(*s->definition("Alias"), 4);
  EXPECT_FALSE(alias.truncated);
  EXPECT_EQ(alias.value, Json(""));
}

TEST(Synthesize, SoundOnEveryFixtureDefinition) {
  for (const char* name : {"produce", "vegalite", "tracery", "cyclic"}) {
    auto schema = fixtureSchema(name);
    std::vector<const SchemaNodeDef*> defs{&schema->root()};
    for (const auto& [n, d] : schema->definitions()) defs.push_back(d);
    for (const auto* def : defs) {
      auto r = synthesizeMinimal(*def, 16);
      EXPECT_EQ(synthesizeMinimal(*def, 16).value.dump(), r.value.dump());
      if (r.truncated) continue;
      auto tree = parse(r.value.dump(2));
      auto diags = validate(tree, *schema, def);
      EXPECT_TRUE(diags.empty()) << name << " " << def->displayName() << ": " << r.value.dump() << " -> "
                                 << (diags.empty() ? "" : diags[0].message);
    }
  }
}

TEST(Validate, Examples) {
  auto schema = fixtureSchema("produce");
  EXPECT_TRUE(validate(parse(R"({"kind":"fruit"})"), *schema).empty());

  auto diags = validate(parse(R"({"kind":"meat"})"), *schema);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].rule, "enum");
  EXPECT_EQ(diags[0].keyPath, (KeyPath{Key{"kind"}}));

  auto empty = validate(parse(""), *schema);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0].keyPath, KeyPath{});
  EXPECT_TRUE(validate(parse(""), *loadSchema(R"({"type":"object"})")).empty());
}

TEST(Validate, AnyOfReportsClosestBranch) {
  auto schema = fixtureSchema("produce");
  // Closest to Box: only `size` is wrong.
  auto diags = validate(parse(R"({"kind":"fruit","packaging":{"material":"wood","size":0}})"), *schema);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].rule, "minimum");
  EXPECT_EQ(diags[0].keyPath, (KeyPath{Key{"packaging"}, Key{"size"}}));
}

TEST(Validate, MalformedDocumentsDegrade) {
  auto schema = fixtureSchema("produce");
  auto tree = parse(R"({"kind": "fruit", "quantity": , "name": 3)");
  auto diags = validate(tree, *schema);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].keyPath, (KeyPath{Key{"name"}}));
  EXPECT_EQ(diags[0].rule, "type");
}

// Valid/invalid labels come from an independent Draft 7 validator.
TEST(Validate, AgreesWithReferenceValidator) {
  auto cases = Json::parse(testsupport::readFile(std::filesystem::path(PROJEDIT_TEST_DATA_DIR) / "validation_cases.json"));
  std::map<std::string, SchemaPtr> schemas;
  std::size_t checked = 0;
  for (const auto& c : cases) {
    const std::string name = c["schema"];
    if (!schemas.count(name)) schemas[name] = fixtureSchema(name);
    std::string text = c["instance"].dump(1);
    auto tree = parse(text);
    auto diags = validate(tree, *schemas[name]);
    EXPECT_EQ(diags.empty(), c["valid"].get<bool>()) << name << ": " << text << "\n"
                                                     << (diags.empty() ? "" : diags[0].keyPath.toString() + " " + diags[0].message);
    for (const auto& d : diags) EXPECT_NE(resolveKeyPath(tree, d.keyPath), nullptr) << d.keyPath.toString();
    ++checked;
  }
  EXPECT_EQ(checked, 1200u);
}
