import hypothesis

hypothesis.settings.register_profile(
    "default", max_examples=100, deadline=None
)
hypothesis.settings.register_profile(
    "fast", max_examples=20, deadline=None
)
hypothesis.settings.load_profile("default")
