#pragma once

#include "mobilink/baselines.hpp"
#include "mobilink/csv.hpp"
#include "mobilink/dataset.hpp"
#include "mobilink/defense.hpp"
#include "mobilink/embedding.hpp"
#include "mobilink/evaluation.hpp"
#include "mobilink/graph.hpp"
#include "mobilink/pipeline.hpp"
#include "mobilink/rng.hpp"
#include "mobilink/similarity.hpp"
#include "mobilink/walks.hpp"
