/*
 * Copyright 2026 The SeisNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

namespace seisnet {

/**
 * Keeps freed feature-map buffers inside the process heap instead of handing
 * them back to the kernel, so repeated forward/backward passes reuse pages.
 * Affects the whole process; meant to be called once from main(). No-op
 * outside glibc.
 */
void retain_freed_memory();

}  // namespace seisnet
