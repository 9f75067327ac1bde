#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "support.hpp"

using namespace edgechain;
using namespace edgechain::messaging;
using edgechain::testing::MiniNet;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::malformed;
}

}  // namespace

TEST(Compose, StartsProcessingAndIsSigned) {
  MiniNet net(2, 3);
  auto msg = compose_message(to_bytes("temp=21.5"), net.infras[0], net.infras[4].public_key, net.registry);
  EXPECT_EQ(msg.status(), Status::processing);
  EXPECT_TRUE(msg.sender_signature_valid());
  EXPECT_TRUE(msg.supporter_sigs.empty());

  auto tampered = msg;
  tampered.content.back() ^= 0x01;
  EXPECT_FALSE(tampered.sender_signature_valid());
}

TEST(Compose, Errors) {
  MiniNet net(1, 2);
  identity::Registry elsewhere(99);
  elsewhere.add_community(0);
  auto stranger = elsewhere.register_device("stranger", Role::edge_node, 0, identity::kAuthorityId);
  EXPECT_EQ(code_of([&] { compose_message(to_bytes("x"), net.infras[0], stranger.public_key, net.registry); }),
            Errc::unregistered_party);
  EXPECT_EQ(code_of([&] { compose_message(to_bytes("x"), stranger, net.infras[0].public_key, net.registry); }),
            Errc::unregistered_party);
  EXPECT_EQ(code_of([&] { compose_message({}, net.infras[0], net.infras[1].public_key, net.registry); }),
            Errc::empty_content);
}

TEST(Message, StatusMachineIsAbsorbing) {
  Message m;
  EXPECT_THROW(m.set_status(Status::processing), Error);
  m.set_status(Status::accepted);
  EXPECT_THROW(m.set_status(Status::failed), Error);
  EXPECT_THROW(m.set_status(Status::accepted), Error);
  Message n;
  n.set_status(Status::failed);
  EXPECT_THROW(n.set_status(Status::accepted), Error);
  EXPECT_EQ(n.status(), Status::failed);
}

TEST(Screen, PassesAboveThreshold) {
  MiniNet net(1, 2);
  const auto& s = net.infras[0];
  const auto& r = net.infras[1];
  net.trust.init(s.device_id, Role::infrastructure, {10, 0, 10, 1.0});
  net.trust.init(r.device_id, Role::infrastructure, {});
  trust::TrustParams params;
  ASSERT_DOUBLE_EQ(net.trust.credit(s.device_id), 0.75);
  ASSERT_DOUBLE_EQ(net.trust.credit(r.device_id), 0.5);
  auto msg = compose_message(to_bytes("x"), s, r.public_key, net.registry);
  EXPECT_EQ(screen_sender(msg, net.registry, net.trust, params), ScreenResult::pass);
  EXPECT_EQ(msg.status(), Status::processing);
}

TEST(Screen, RejectsBelowThreshold) {
  MiniNet net(1, 2);
  const auto& s = net.infras[0];
  const auto& r = net.infras[1];
  trust::TrustParams params;
  net.trust.init(s.device_id, Role::infrastructure, {0, 10, 10, 0.2});
  auto msg = compose_message(to_bytes("x"), s, r.public_key, net.registry);
  EXPECT_EQ(screen_sender(msg, net.registry, net.trust, params), ScreenResult::reject);
  EXPECT_EQ(msg.status(), Status::failed);

  // Receiver side counts too.
  net.trust.init(s.device_id, Role::infrastructure, {});
  net.trust.init(r.device_id, Role::infrastructure, {0, 10, 10, 0.2});
  auto back = compose_message(to_bytes("y"), s, r.public_key, net.registry);
  EXPECT_EQ(screen_sender(back, net.registry, net.trust, params), ScreenResult::reject);
}

TEST(Screen, ZeroThresholdPassesNonNegativeCredit) {
  MiniNet net(1, 2);
  trust::TrustParams params;
  params.credit_threshold = 0.0;
  net.trust.init(net.infras[0].device_id, Role::infrastructure, {5, 5, 10, 0.0});  // credit exactly 0
  auto msg = compose_message(to_bytes("x"), net.infras[0], net.infras[1].public_key, net.registry);
  EXPECT_EQ(screen_sender(msg, net.registry, net.trust, params), ScreenResult::pass);
}

TEST(Endorse, LegalMessageGetsPSignatures) {
  MiniNet net(1, 6);
  auto candidates = net.candidates();
  auto msg = compose_message(to_bytes("legal"), net.infras[0], net.infras[1].public_key, net.registry);
  EndorsementPolicy policy{4, 0.2, 0.0, 0};
  auto rng = RngStream::derive(1, "endorse");
  auto res = gather_endorsements(msg, policy, candidates, 0.25, rng);
  EXPECT_TRUE(res.endorsed);
  EXPECT_FALSE(res.flagged_by);
  EXPECT_EQ(msg.supporter_sigs.size(), 4u);
  EXPECT_TRUE(endorsement_valid(msg, 4));
  for (const auto& s : msg.supporter_sigs) EXPECT_NE(s.supporter, msg.sender_pk);
}

TEST(Endorse, CertainDetectionIntercepts) {
  MiniNet net(1, 3);
  auto candidates = net.candidates();
  auto msg = compose_message(to_bytes("bad"), net.infras[0], net.infras[1].public_key, net.registry);
  msg.is_illegal = true;
  EndorsementPolicy policy{1, 1.0, 0.0, 0};
  auto rng = RngStream::derive(1, "endorse");
  auto res = gather_endorsements(msg, policy, candidates, 0.25, rng);
  EXPECT_FALSE(res.endorsed);
  ASSERT_TRUE(res.flagged_by);
  EXPECT_EQ(msg.status(), Status::failed);
  EXPECT_THROW(route_to_receiver(msg, net.registry, 1, 0), Error);
}

TEST(Endorse, InsufficientSupporters) {
  MiniNet net(1, 4);
  auto candidates = net.candidates();
  auto msg = compose_message(to_bytes("x"), net.infras[0], net.infras[1].public_key, net.registry);
  EndorsementPolicy policy{4, 0.2, 0.0, 0};  // 3 candidates besides the sender
  auto rng = RngStream::derive(1, "endorse");
  EXPECT_EQ(code_of([&] { gather_endorsements(msg, policy, candidates, 0.25, rng); }), Errc::insufficient_supporters);
}

TEST(Endorse, SelectionOrder) {
  MiniNet net(1, 6);
  auto candidates = net.candidates();
  candidates[1].credit = 0.9;
  candidates[2].credit = 0.1;  // below threshold
  candidates[3].tier = 1;
  candidates[3].credit = 1.0;
  auto msg = compose_message(to_bytes("x"), net.infras[0], net.infras[1].public_key, net.registry);
  auto chosen = select_supporters(msg, candidates, 3, 0.25);
  ASSERT_EQ(chosen.size(), 3u);
  EXPECT_EQ(chosen[0]->bundle->device_id, net.infras[1].device_id);  // tier 0, highest credit
  EXPECT_EQ(chosen[1]->bundle->device_id, net.infras[4].device_id);  // tie at 0.5, lower id
  EXPECT_EQ(chosen[2]->bundle->device_id, net.infras[5].device_id);
}

TEST(Endorse, ShapeCheckRejectsBadEndorsements) {
  MiniNet net(1, 6);
  auto candidates = net.candidates();
  auto msg = compose_message(to_bytes("x"), net.infras[0], net.infras[1].public_key, net.registry);
  EndorsementPolicy policy{3, 0.0, 0.0, 0};
  auto rng = RngStream::derive(2, "endorse");
  ASSERT_TRUE(gather_endorsements(msg, policy, candidates, 0.25, rng).endorsed);
  EXPECT_TRUE(endorsement_valid(msg, 3));
  EXPECT_FALSE(endorsement_valid(msg, 4));

  auto dup = msg;
  dup.supporter_sigs[1] = dup.supporter_sigs[0];
  EXPECT_FALSE(endorsement_valid(dup, 3));

  auto forged = msg;
  forged.supporter_sigs[2].signature.bytes[0] ^= 0x80;
  EXPECT_FALSE(endorsement_valid(forged, 3));

  auto altered = msg;
  altered.content.push_back('!');
  EXPECT_FALSE(endorsement_valid(altered, 3));
}

// Interception over many illegal messages against the 1-(1-d)^p oracle.
TEST(EndorseProperty, InterceptionWithinThreeStandardErrors) {
  MiniNet net(1, 10);
  auto candidates = net.candidates();
  const auto base = compose_message(to_bytes("bad"), net.infras[0], net.infras[1].public_key, net.registry);
  auto rng = RngStream::derive(42, "interception");
  for (std::uint32_t p : {2u, 8u}) {
    EndorsementPolicy policy{p, 0.2, 0.0, 0};
    const int n = 10'000;
    int intercepted = 0;
    for (int i = 0; i < n; ++i) {
      Message m = base;
      m.is_illegal = true;
      if (!gather_endorsements(m, policy, candidates, 0.25, rng).endorsed) ++intercepted;
    }
    const double expected = 1.0 - std::pow(0.8, p);
    const double se = std::sqrt(expected * (1 - expected) / n);
    EXPECT_NEAR(static_cast<double>(intercepted) / n, expected, 3 * se) << "p=" << p;
  }
}

TEST(EndorseProperty, LegalNeverInterceptedByDefault) {
  MiniNet net(1, 10);
  auto candidates = net.candidates();
  const auto base = compose_message(to_bytes("ok"), net.infras[0], net.infras[1].public_key, net.registry);
  auto rng = RngStream::derive(43, "legal");
  EndorsementPolicy policy{8, 0.9, 0.0, 0};
  for (int i = 0; i < 300; ++i) {
    Message m = base;
    EXPECT_TRUE(gather_endorsements(m, policy, candidates, 0.25, rng).endorsed);
  }
}

TEST(Route, CrossCommunityHops) {
  MiniNet net(8, 3);
  auto candidates = net.candidates();
  const auto& sender = net.infras[0];    // community 0
  const auto& receiver = net.infras[21];  // community 7
  auto msg = compose_message(to_bytes("x"), sender, receiver.public_key, net.registry);
  auto rng = RngStream::derive(3, "endorse");
  ASSERT_TRUE(gather_endorsements(msg, {2, 0.2, 0.0, 0}, candidates, 0.25, rng).endorsed);
  auto rec = route_to_receiver(msg, net.registry, 2, 17);
  EXPECT_EQ(rec.hops, (std::vector<DeviceId>{"edge-0", "edge-7", receiver.device_id}));
  EXPECT_EQ(msg.status(), Status::accepted);
  EXPECT_EQ(rec.tick, 17u);

  auto decoded = DeliveryRecord::decode(rec.encode());
  EXPECT_EQ(decoded.hops, rec.hops);
  EXPECT_EQ(decoded.supporters, rec.supporters);
  EXPECT_EQ(decoded.msg_id, rec.msg_id);
}

TEST(Route, SameCommunityTwoHops) {
  MiniNet net(2, 4);
  auto candidates = net.candidates();
  auto msg = compose_message(to_bytes("x"), net.infras[0], net.infras[2].public_key, net.registry);
  auto rng = RngStream::derive(3, "endorse");
  ASSERT_TRUE(gather_endorsements(msg, {2, 0.2, 0.0, 0}, candidates, 0.25, rng).endorsed);
  auto rec = route_to_receiver(msg, net.registry, 2, 0);
  EXPECT_EQ(rec.hops, (std::vector<DeviceId>{"edge-0", net.infras[2].device_id}));
}

TEST(Route, RequiresEndorsement) {
  MiniNet net(1, 3);
  auto msg = compose_message(to_bytes("x"), net.infras[0], net.infras[1].public_key, net.registry);
  EXPECT_EQ(code_of([&] { route_to_receiver(msg, net.registry, 2, 0); }), Errc::not_endorsed);
  EXPECT_EQ(msg.status(), Status::processing);
}
