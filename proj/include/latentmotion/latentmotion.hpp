#pragma once

// Motion decomposition in GAN latent space: transition-vector trajectories,
// PCA motion subspaces, projection/recombination/transfer, disentanglement
// analysis, a FastICA baseline, a synthetic ground-truth generator, and
// binary file formats.

#include "latentmotion/analysis.hpp"
#include "latentmotion/errors.hpp"
#include "latentmotion/ica.hpp"
#include "latentmotion/io.hpp"
#include "latentmotion/philox.hpp"
#include "latentmotion/subspace.hpp"
#include "latentmotion/synth.hpp"
#include "latentmotion/trajectory.hpp"
