/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "boxmend/coco.hpp"
#include "boxmend/error.hpp"
#include "oracles.hpp"

namespace boxmend {
namespace {

constexpr const char* kMinimal = R"({
  "images": [{"id": 1, "file_name": "a.png", "width": 20, "height": 30}],
  "categories": [{"id": 7, "name": "dog"}],
  "annotations": [{"id": 3, "image_id": 1, "category_id": 7, "bbox": [2, 2, 4, 8]}]
})";

ErrorCode code_of(std::string_view text) {
  try {
    parse_coco(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for " << text;
  return ErrorCode::kInvalidArgument;
}

TEST(LoadCoco, TopLeftBecomesCenter) {
  const Dataset d = parse_coco(kMinimal);
  ASSERT_EQ(d.annotations.size(), 1u);
  EXPECT_EQ(d.annotations[0].box, (Box{4, 6, 4, 8}));
  EXPECT_EQ(d.images[0].dims, (ImageDims{20, 30}));
  EXPECT_EQ(d.images[0].file_path, "a.png");
  EXPECT_EQ(d.categories[0].name, "dog");
  EXPECT_FALSE(d.annotations[0].mask.has_value());
}

TEST(LoadCoco, EmptyAnnotationList) {
  const Dataset d =
      parse_coco(R"({"images":[{"id":1,"file_name":"a","width":2,"height":2}],"categories":[],"annotations":[]})");
  EXPECT_TRUE(d.annotations.empty());
}

TEST(LoadCoco, Errors) {
  EXPECT_EQ(code_of("{not json"), ErrorCode::kParseError);
  EXPECT_EQ(code_of(R"({"images":[],"categories":[]})"), ErrorCode::kSchemaError);
  EXPECT_EQ(code_of(R"({"images":{},"categories":[],"annotations":[]})"), ErrorCode::kSchemaError);
  EXPECT_EQ(code_of(R"({"images":[{"id":1,"file_name":"a","width":2,"height":2}],"categories":[{"id":1,"name":"x"}],
      "annotations":[{"id":1,"image_id":99,"category_id":1,"bbox":[0,0,1,1]}]})"),
            ErrorCode::kDanglingReference);
  EXPECT_EQ(code_of(R"({"images":[{"id":1,"file_name":"a","width":2,"height":2}],"categories":[{"id":1,"name":"x"}],
      "annotations":[{"id":1,"image_id":1,"category_id":5,"bbox":[0,0,1,1]}]})"),
            ErrorCode::kDanglingReference);
  EXPECT_EQ(code_of(R"({"images":[{"id":1,"file_name":"a","width":2,"height":2}],"categories":[{"id":1,"name":"x"}],
      "annotations":[{"id":1,"image_id":1,"category_id":1,"bbox":["0",0,1,1]}]})"),
            ErrorCode::kSchemaError);
}

TEST(LoadCoco, InvalidBoxNamesAnnotation) {
  try {
    parse_coco(R"({"images":[{"id":1,"file_name":"a","width":9,"height":9}],"categories":[{"id":1,"name":"x"}],
        "annotations":[{"id":42,"image_id":1,"category_id":1,"bbox":[0,0,0,3]}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidBox);
    EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
  }
}

TEST(LoadCoco, DecodesRleSegmentation) {
  const Dataset d = parse_coco(R"({"images":[{"id":1,"file_name":"a","width":2,"height":2}],
      "categories":[{"id":1,"name":"x"}],
      "annotations":[{"id":1,"image_id":1,"category_id":1,"bbox":[0,0,1,1],
                      "segmentation":{"size":[2,2],"counts":[0,1,3]}}]})");
  ASSERT_TRUE(d.annotations[0].mask.has_value());
  EXPECT_TRUE(d.annotations[0].mask->at(0, 0));
  EXPECT_EQ(d.annotations[0].mask->count(), 1u);
}

TEST(SaveCoco, InverseConversionAndInfo) {
  Dataset d = parse_coco(kMinimal);
  d.provenance = {{"seed", 7}, {"noise_level", 0.4}, {"stage", "noisy"}};
  const auto j = nlohmann::json::parse(dump_coco(d));
  EXPECT_EQ(j["annotations"][0]["bbox"], nlohmann::json::parse("[2.0,2.0,4.0,8.0]"));
  EXPECT_EQ(j["info"]["boxmend"]["seed"], 7);
  EXPECT_EQ(j["info"]["boxmend"]["stage"], "noisy");
  EXPECT_EQ(parse_coco(dump_coco(d)).provenance, d.provenance);
}

void expect_equivalent(const Dataset& a, const Dataset& b) {
  ASSERT_EQ(a.images, b.images);
  ASSERT_EQ(a.categories, b.categories);
  ASSERT_EQ(a.provenance, b.provenance);
  ASSERT_EQ(a.annotations.size(), b.annotations.size());
  for (std::size_t i = 0; i < a.annotations.size(); ++i) {
    const auto& x = a.annotations[i];
    const auto& y = b.annotations[i];
    ASSERT_EQ(x.id, y.id);
    ASSERT_EQ(x.image_id, y.image_id);
    ASSERT_EQ(x.category_id, y.category_id);
    ASSERT_NEAR(x.box.cx, y.box.cx, 1e-6);
    ASSERT_NEAR(x.box.cy, y.box.cy, 1e-6);
    ASSERT_NEAR(x.box.w, y.box.w, 1e-6);
    ASSERT_NEAR(x.box.h, y.box.h, 1e-6);
    ASSERT_EQ(x.mask, y.mask);
  }
}

TEST(SaveCoco, RoundTripPropertyGenerated) {
  Pcg32 rng(31337, 1);
  for (int i = 0; i < 1000; ++i) {
    const Dataset d = testing::random_dataset(rng);
    const std::string text = dump_coco(d);
    const Dataset back = parse_coco(text);
    ASSERT_NO_FATAL_FAILURE(expect_equivalent(d, back)) << "case " << i;
    // A second trip is byte-stable.
    ASSERT_EQ(dump_coco(back), text) << "case " << i;
  }
}

TEST(SaveCoco, DeterministicAndOrderedById) {
  Pcg32 rng(4, 4);
  Dataset d = testing::random_dataset(rng);
  while (d.annotations.size() < 3) d = testing::random_dataset(rng);
  const std::string first = dump_coco(d);
  EXPECT_EQ(dump_coco(d), first);
  std::reverse(d.annotations.begin(), d.annotations.end());
  std::reverse(d.images.begin(), d.images.end());
  EXPECT_EQ(dump_coco(d), first);
  const auto j = nlohmann::json::parse(first);
  for (std::size_t i = 1; i < j["annotations"].size(); ++i) {
    EXPECT_LT(j["annotations"][i - 1]["id"].get<int>(), j["annotations"][i]["id"].get<int>());
  }
}

TEST(SaveCoco, FileRoundTripAndIoError) {
  const auto dir = std::filesystem::temp_directory_path() / "boxmend_coco_test";
  std::filesystem::remove_all(dir);
  const Dataset d = parse_coco(kMinimal);
  save_coco(d, dir / "nested" / "d.json");
  EXPECT_EQ(load_coco(dir / "nested" / "d.json"), d);
  try {
    load_coco(dir / "missing.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
  std::filesystem::remove_all(dir);
}

TEST(Validate, CleanDatasetHasEmptyReport) { EXPECT_TRUE(validate(parse_coco(kMinimal)).empty()); }

TEST(Validate, DuplicateAnnotationId) {
  Dataset d = parse_coco(kMinimal);
  d.annotations.push_back(d.annotations[0]);
  const auto r = validate(d);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].severity, Severity::kError);
  EXPECT_EQ(r.issues[0].code, "duplicate-annotation-id");
}

TEST(Validate, OutOfFrameIsWarning) {
  Dataset d = parse_coco(kMinimal);
  d.annotations[0].box = Box{19, 6, 4, 4};
  const auto r = validate(d);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].severity, Severity::kWarning);
  EXPECT_EQ(r.warning_count(), 1u);
  EXPECT_EQ(r.error_count(), 0u);
}

TEST(Validate, DanglingReferencesAndBadMask) {
  Dataset d = parse_coco(kMinimal);
  Annotation a = d.annotations[0];
  a.id = 4;
  a.image_id = 55;
  d.annotations.push_back(a);
  a.id = 5;
  a.image_id = 1;
  a.mask = Mask(3, 3);
  d.annotations.push_back(a);
  const auto r = validate(d);
  EXPECT_EQ(r.error_count(), 2u);
  const auto j = r.to_json();
  EXPECT_EQ(j["errors"], 2);
}

}  // namespace
}  // namespace boxmend
