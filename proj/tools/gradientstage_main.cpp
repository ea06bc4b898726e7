// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/cli.hpp"

int main(int argc, char** argv) { return gradientstage::cli::run(argc, argv); }
