#pragma once

// Correction rule mining: umbrella header.

#include "crmine/bitset.hpp"
#include "crmine/dataset.hpp"
#include "crmine/discretize.hpp"
#include "crmine/io.hpp"
#include "crmine/items.hpp"
#include "crmine/miner.hpp"
#include "crmine/models.hpp"
#include "crmine/numeric.hpp"
#include "crmine/postprocess.hpp"
#include "crmine/rng.hpp"
#include "crmine/rules.hpp"
#include "crmine/scenario.hpp"
#include "crmine/table.hpp"
