import io

from voice import Voice


def test_quiet_silences_progress_but_not_errors():
    stream = io.StringIO()
    voice = Voice(stream=stream, quiet=True)
    voice.speak_info("growing")
    voice.speak_success("done")
    voice.speak_error("bad word")
    assert stream.getvalue() == "error: bad word\n"


def test_table_alignment():
    stream = io.StringIO()
    Voice(stream=stream).speak_table([("spectrum", 0.69722436226800535), ("identities", True)],
                                     ["suite", "value"])
    lines = stream.getvalue().splitlines()
    assert lines[0].startswith("suite       value")
    assert lines[1] == "spectrum    0.697224"
    assert lines[2] == "identities  True"


def test_history():
    voice = Voice(stream=io.StringIO())
    voice.speak("first")
    voice.speak_multiline("a long message " * 10, prefix="> ")
    history = voice.get_response_history()
    assert history[0] == "first"
    assert len(history) == 2
