#pragma once

#include "mgeo/rng.hpp"
#include "mgeo/linalg.hpp"
#include "mgeo/datasets.hpp"
#include "mgeo/ltsa.hpp"
#include "mgeo/nn.hpp"
#include "mgeo/autoencoder.hpp"
#include "mgeo/curve.hpp"
#include "mgeo/decoder.hpp"
#include "mgeo/losses.hpp"
#include "mgeo/interpolation.hpp"
#include "mgeo/oracle.hpp"
#include "mgeo/pipeline.hpp"
