#pragma once

#include "edgechain/consensus/difficulty.hpp"
#include "edgechain/consensus/election.hpp"
#include "edgechain/consensus/puzzle.hpp"
#include "edgechain/identity.hpp"
#include "edgechain/ledger/block.hpp"
#include "edgechain/ledger/chain.hpp"
#include "edgechain/ledger/merkle.hpp"
#include "edgechain/messaging.hpp"
#include "edgechain/rewards.hpp"
#include "edgechain/simnet/simulation.hpp"
#include "edgechain/trust.hpp"
