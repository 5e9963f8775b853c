#pragma once

#include "specmap/datasets.hpp"
#include "specmap/error.hpp"
#include "specmap/experiments.hpp"
#include "specmap/fmap.hpp"
#include "specmap/graph.hpp"
#include "specmap/io.hpp"
#include "specmap/laplacian.hpp"
#include "specmap/matching.hpp"
#include "specmap/random.hpp"
#include "specmap/rewire.hpp"
#include "specmap/spectral.hpp"
#include "specmap/subgraph.hpp"
