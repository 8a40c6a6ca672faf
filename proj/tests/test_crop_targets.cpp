#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "posekit/crop_targets.hpp"
#include "posekit/metrics.hpp"
#include "test_support.hpp"

using namespace posekit;
using testsup::max_abs_diff;

TEST_CASE("bbox validation") {
    CHECK_NOTHROW(validate_bbox({0, 0, 100, 50}));
    CHECK_THROWS_AS(validate_bbox({10, 10, 10.5, 100}), Error);
    CHECK_THROWS_AS(validate_bbox({10, 10, 100, 10}), Error);
    try {
        validate_bbox({5, 5, 4, 50});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateBox);
    }
}

TEST_CASE("crop_scales examples") {
    const CameraModel cam = testsup::default_camera();
    const CropScales s1 = crop_scales(cam, {0, 0, 300, 300});
    CHECK(s1.sx == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(s1.sy == doctest::Approx(4.0).epsilon(1e-12));

    const CropScales s2 = crop_scales(cam, {0, 0, 1200, 1200});
    CHECK(s2.sx == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s2.sy == doctest::Approx(1.0).epsilon(1e-12));

    CameraModel square = cam;
    square.alpha = 1.0;
    square.width = 800.0;
    square.height = 800.0;
    const CropScales s3 = crop_scales(square, {0, 0, 800, 800});
    CHECK(s3.sx == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s3.sy == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("depth proxy encode and decode") {
    CHECK(encode_depth(10.0, {4.0, 4.0}) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(encode_depth(7.25, {1.0, 1.0}) == doctest::Approx(7.25).epsilon(1e-12));
    CHECK(encode_depth(6.0, {2.0, 3.0}) == doctest::Approx(2.5).epsilon(1e-12));

    CHECK(decode_depth(2.5, {4.0, 4.0}) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(decode_depth(7.25, {1.0, 1.0}) == doctest::Approx(7.25).epsilon(1e-12));

    CHECK_THROWS_AS(encode_depth(0.0, {1.0, 1.0}), Error);
    CHECK_THROWS_AS(encode_depth(-3.0, {1.0, 1.0}), Error);
    CHECK_THROWS_AS(decode_depth(-0.1, {1.0, 1.0}), Error);
}

TEST_CASE("depth maps are linear and inverse of each other") {
    Rng rng(21);
    for (int i = 0; i < 500; ++i) {
        const CropScales s{rng.uniform(0.2, 12.0), rng.uniform(0.2, 12.0)};
        const double z = rng.uniform(0.01, 100.0);
        const double k = rng.uniform(0.1, 10.0);
        CHECK(decode_depth(encode_depth(z, s), s) == doctest::Approx(z).epsilon(1e-12));
        CHECK(encode_depth(k * z, s) == doctest::Approx(k * encode_depth(z, s)).epsilon(1e-12));
    }
}

TEST_CASE("lateral encoding examples") {
    CameraModel cam{1000.0, 1000.0, 960.0, 600.0, 1920.0, 1200.0, 1.6};

    // box centered exactly on the projection
    const BBox centered{960.0, 500.0, 1160.0, 700.0};
    const auto [ux0, uy0] = encode_lateral(Vec3(1, 0, 10), cam, centered);
    CHECK(std::abs(ux0) < 1e-12);
    CHECK(std::abs(uy0) < 1e-12);

    // box centered at the principal point, projection 100 px to the right
    const BBox at_pp{860.0, 500.0, 1060.0, 700.0};
    const auto [ux1, uy1] = encode_lateral(Vec3(1, 0, 10), cam, at_pp);
    CHECK(ux1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(uy1) < 1e-12);

    CHECK_THROWS_AS(encode_lateral(Vec3(1, 0, -1), cam, at_pp), Error);
}

TEST_CASE("lateral decoding examples") {
    CameraModel cam{1000.0, 1000.0, 960.0, 600.0, 1920.0, 1200.0, 1.6};

    const BBox at_pp{860.0, 500.0, 1060.0, 700.0};
    const auto [x0, y0] = decode_lateral(0.0, 0.0, 5.0, cam, at_pp);
    CHECK(std::abs(x0) < 1e-12);
    CHECK(std::abs(y0) < 1e-12);

    const auto [x1, y1] = decode_lateral(0.5, 0.0, 10.0, cam, at_pp);
    CHECK(x1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(y1) < 1e-12);

    CHECK_THROWS_AS(decode_lateral(0.1, 0.1, 0.0, cam, at_pp), Error);
}

TEST_CASE("lateral round-trip over random inputs") {
    Rng rng(22);
    for (int i = 0; i < 1000; ++i) {
        const CameraModel cam = testsup::random_camera(rng);
        const BBox box = testsup::random_box(rng, cam);
        const Pose pose = testsup::random_pose(rng);
        const auto [ux, uy] = encode_lateral(pose.translation, cam, box);
        const auto [x, y] = decode_lateral(ux, uy, pose.translation.z(), cam, box);
        CHECK(std::abs(x - pose.translation.x()) < 1e-9);
        CHECK(std::abs(y - pose.translation.y()) < 1e-9);
    }
}

TEST_CASE("offset-in-pixels is invariant to rescaling the box about its center") {
    Rng rng(23);
    for (int i = 0; i < 300; ++i) {
        const CameraModel cam = testsup::random_camera(rng);
        const BBox box = testsup::random_box(rng, cam);
        const Pose pose = testsup::random_pose(rng);
        const double k = rng.uniform(0.5, 2.0);
        const BBox scaled{box.center_x() - 0.5 * k * box.width(),
                          box.center_y() - 0.5 * k * box.height(),
                          box.center_x() + 0.5 * k * box.width(),
                          box.center_y() + 0.5 * k * box.height()};
        const auto [ux, uy] = encode_lateral(pose.translation, cam, box);
        const auto [vx, vy] = encode_lateral(pose.translation, cam, scaled);
        CHECK(ux * box.width() == doctest::Approx(vx * scaled.width()).epsilon(1e-9));
        CHECK(uy * box.height() == doctest::Approx(vy * scaled.height()).epsilon(1e-9));
    }
}

TEST_CASE("encode_pose hand-checked cases") {
    CameraModel cam{1000.0, 1000.0, 960.0, 600.0, 1920.0, 1200.0, 1.6};
    const BBox at_pp{860.0, 500.0, 1060.0, 700.0};

    Pose pose;
    pose.translation = Vec3(0, 0, 10);
    const TargetVector t = encode_pose(pose, cam, at_pp);
    const CropScales s = crop_scales(cam, at_pp);
    CHECK(std::abs(t.ux) < 1e-12);
    CHECK(std::abs(t.uy) < 1e-12);
    CHECK(t.uz == doctest::Approx(encode_depth(10.0, s)).epsilon(1e-12));
    CHECK((t.six.r1 - Vec3(1, 0, 0)).norm() < 1e-12);
    CHECK((t.six.r2 - Vec3(0, 1, 0)).norm() < 1e-12);

    pose.rotation = rot_z(deg_to_rad(90.0));
    const TargetVector t2 = encode_pose(pose, cam, at_pp);
    CHECK((t2.six.r1 - Vec3(0, 1, 0)).norm() < 1e-12);
    CHECK((t2.six.r2 - Vec3(-1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("decode_pose hand-checked case") {
    CameraModel cam{1000.0, 1000.0, 960.0, 600.0, 1920.0, 1200.0, 1.6};
    const BBox at_pp{860.0, 500.0, 1060.0, 700.0};
    TargetVector t;
    t.uz = 3.0;
    const Pose pose = decode_pose(t, cam, at_pp);
    const CropScales s = crop_scales(cam, at_pp);
    CHECK(max_abs_diff(pose.rotation, Mat3::Identity()) < 1e-12);
    CHECK(std::abs(pose.translation.x()) < 1e-12);
    CHECK(std::abs(pose.translation.y()) < 1e-12);
    CHECK(pose.translation.z() == doctest::Approx(decode_depth(3.0, s)).epsilon(1e-12));
}

TEST_CASE("encode/decode round-trip on random poses") {
    Rng rng(24);
    double max_et = 0.0;
    double max_er = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const CameraModel cam = testsup::random_camera(rng);
        const BBox box = testsup::random_box(rng, cam);
        const Pose pose = testsup::random_pose(rng);
        const Pose back = decode_pose(encode_pose(pose, cam, box), cam, box);
        max_et = std::max(max_et, translation_error({back, pose}));
        max_er = std::max(max_er, rotation_error({back, pose}));
    }
    CHECK(max_et < 1e-9);
    CHECK(max_er < 1e-6);
}

TEST_CASE("round-trip holds for any box as long as encode and decode share it") {
    Rng rng(25);
    const CameraModel cam = testsup::default_camera();
    for (int i = 0; i < 300; ++i) {
        // boxes of odd sizes and positions, including ones hanging outside
        const double w = rng.uniform(2.0, 900.0);
        const double h = rng.uniform(2.0, 900.0);
        const double x = rng.uniform(-200.0, cam.width - w + 200.0);
        const double y = rng.uniform(-200.0, cam.height - h + 200.0);
        const BBox box{x, y, x + w, y + h};
        const Pose pose = testsup::random_pose(rng);
        const Pose back = decode_pose(encode_pose(pose, cam, box), cam, box);
        CHECK(translation_error({back, pose}) < 1e-9);
        CHECK(rotation_error({back, pose}) < 1e-6);
    }
}

TEST_CASE("decoded translation reprojects to the encoded pixel offset") {
    Rng rng(26);
    for (int i = 0; i < 300; ++i) {
        const CameraModel cam = testsup::random_camera(rng);
        const BBox box = testsup::random_box(rng, cam);
        const Pose pose = testsup::random_pose(rng);
        const TargetVector t = encode_pose(pose, cam, box);
        const Pose back = decode_pose(t, cam, box);
        const Eigen::Vector2d pixel = project(cam, back.translation);
        CHECK(pixel.x() ==
              doctest::Approx(box.center_x() + t.ux * box.width()).epsilon(1e-9));
        CHECK(pixel.y() ==
              doctest::Approx(box.center_y() + t.uy * box.height()).epsilon(1e-9));
    }
}

TEST_CASE("decode_pose propagates constituent errors") {
    const CameraModel cam = testsup::default_camera();
    const BBox box{0, 0, 200, 200};
    TargetVector t;
    t.uz = -1.0;
    CHECK_THROWS_AS(decode_pose(t, cam, box), Error);
    t.uz = 2.0;
    t.six = {Vec3::Zero(), Vec3(0, 1, 0)};
    CHECK_THROWS_AS(decode_pose(t, cam, box), Error);
    CHECK_THROWS_AS(decode_pose(TargetVector{}, cam, BBox{0, 0, 0.5, 200}), Error);
}
