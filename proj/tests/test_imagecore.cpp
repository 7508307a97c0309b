#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <string>

#include "support.hpp"
#include "terrasemi/png_io.hpp"

namespace {

using namespace terrasemi;
namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "terrasemi_imagecore";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Rng, SameSeedAndStreamRepeat) {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u32(), b.next_u32());
}

TEST(Rng, StreamsDiffer) {
  Rng a(42, 7), b(42, 8);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u32() == b.next_u32();
  EXPECT_LT(same, 3);
}

TEST(Rng, UniformIntStaysInRangeAndCoversIt) {
  Rng rng(1, 1);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(-3, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_THROW(rng.uniform_int(0u), Error);
}

TEST(Rng, UniformMeanIsAboutHalf) {
  Rng rng(3, 9);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(5, 5);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(v, sorted);
}

TEST(Rng, KeyedStreamsIgnoreOrder) {
  Rng a = Rng::for_key(9, "tile_0003");
  Rng b = Rng::for_key(9, "tile_0003");
  EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(Rng::for_key(9, "tile_0003").next_u64(), Rng::for_key(9, "tile_0004").next_u64());
}

TEST(Digest, KnownFnvValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(to_hex(0xabcULL), "0000000000000abc");
}

TEST(Image, RejectsOutOfRangeSamples) {
  EXPECT_THROW(MultiBandImage(1, 1, generic_bands(1), {1.5f}), Error);
  EXPECT_THROW(MultiBandImage(1, 1, generic_bands(1), {-0.1f}), Error);
  EXPECT_THROW(MultiBandImage(1, 2, generic_bands(1), {0.5f}), Error);
  EXPECT_NO_THROW(MultiBandImage(1, 1, generic_bands(1), {1.0f}));
}

TEST(Image, LabelClassRange) {
  EXPECT_THROW(LabelMap(2, 2, 1), Error);
  EXPECT_THROW(LabelMap(2, 2, 2, std::vector<std::uint8_t>{0, 1, 2, 0}), Error);
  EXPECT_NO_THROW(LabelMap(2, 2, 2, std::vector<std::uint8_t>{0, 1, kIgnore, 0}));
}

TEST(Image, BandNamesRoundTrip) {
  for (Band b : {Band::kR, Band::kG, Band::kB, Band::kNir, Band::kVV, Band::kVH, Band::kGeneric})
    EXPECT_EQ(parse_band(band_name(b)), b);
  EXPECT_THROW(parse_band("SWIR"), Error);
}

TEST(Image, QuantizeRoundsHalfUp) {
  EXPECT_EQ(quantize_u8(0.0f), 0);
  EXPECT_EQ(quantize_u8(1.0f), 255);
  EXPECT_EQ(quantize_u8(127.5f / 255.0f), 128);
}

TEST(Container, RoundTripsEveryKind) {
  Rng rng(11, 0);
  const auto img = tst::random_image(rng, 5, 7, rgbn_bands());
  const auto labels = tst::random_labels(rng, 5, 7, 4);
  ValidityMask mask(5, 7, true);
  mask.set(2, 3, false);
  const FloatTensor t{2, 3, 1, {-1.5f, 2.0f, 0.0f, 7.0f, 1e-3f, -4.0f}};

  EXPECT_EQ(std::get<MultiBandImage>(decode_container(encode_container(img))), img);
  EXPECT_EQ(std::get<LabelMap>(decode_container(encode_container(labels))), labels);
  const auto m2 = std::get<ValidityMask>(decode_container(encode_container(mask)));
  EXPECT_EQ(m2.count_valid(), mask.count_valid());
  EXPECT_FALSE(m2.at(2, 3));
  EXPECT_EQ(std::get<FloatTensor>(decode_container(encode_container(t))), t);
}

TEST(Container, HeaderIsCompactSortedJson) {
  const std::string bytes = encode_container(MultiBandImage(1, 2, sar_bands()));
  ASSERT_EQ(bytes.substr(0, 4), "MBT1");
  const std::uint32_t len = static_cast<std::uint8_t>(bytes[4]) | static_cast<std::uint8_t>(bytes[5]) << 8 |
                            static_cast<std::uint8_t>(bytes[6]) << 16 | static_cast<std::uint8_t>(bytes[7]) << 24;
  EXPECT_EQ(bytes.substr(8, len),
            R"({"bands":["VV","VH"],"channels":2,"dtype":"f32le","height":1,"kind":"image","width":2})");
  EXPECT_EQ(bytes.size(), 8 + len + 1 * 2 * 2 * 4u);
}

TEST(Container, RejectsBadMagic) {
  std::string bytes = encode_container(MultiBandImage(2, 2, generic_bands(1)));
  bytes[0] = 'X';
  try {
    decode_container(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
}

TEST(Container, RejectsSizeMismatch) {
  std::string bytes = encode_container(MultiBandImage(2, 2, generic_bands(1)));
  for (const std::string& b : {bytes.substr(0, bytes.size() - 1), bytes + '\0'}) {
    try {
      decode_container(b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kFormat);
      EXPECT_NE(std::string(e.what()).find("header/payload size mismatch"), std::string::npos);
    }
  }
}

TEST(Container, RelaxedFloatsAcceptOutOfRangeImages) {
  const FloatTensor t{2, 1, 3, {-2.f, 0.f, 3.f, 0.5f, 9.f, -1.f}};
  std::string bytes = encode_container(t);
  EXPECT_EQ(std::get<FloatTensor>(decode_container(bytes, true)), t);
}

TEST(Container, FileRoundTripIsByteStable) {
  Rng rng(2, 2);
  const auto img = tst::random_image(rng, 4, 4, rgb_bands());
  const auto p = scratch("img.mbt");
  write_container(img, p);
  EXPECT_EQ(read_image(p), img);
  EXPECT_EQ(read_file(p), encode_container(img));
  EXPECT_FALSE(fs::exists(p.string() + ".tmp"));
  EXPECT_THROW(read_labels(p), Error);
}

TEST(Png, RoundTripsEightBitImages) {
  Rng rng(4, 4);
  for (const BandList& bands : {generic_bands(1), rgb_bands(), rgbn_bands()}) {
    const auto img = tst::random_u8_image(rng, 6, 9, bands);
    const auto p = scratch("rt.png");
    write_png(img, p);
    EXPECT_EQ(read_png(p), img);
  }
  EXPECT_THROW(write_png(MultiBandImage(2, 2, sar_bands()), scratch("sar.png")), Error);
}

TEST(Parallel, MatchesSequentialAndRethrowsLowestIndex) {
  std::vector<int> out(100, 0);
  parallel_for(out.size(), 8, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

}  // namespace
