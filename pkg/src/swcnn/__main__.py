from swcnn.cli import entry

entry()
