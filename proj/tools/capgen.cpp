// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/cli.hpp"

int main(int argc, char** argv) { return bncap::cli::run(argc, argv); }
